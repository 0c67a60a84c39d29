use super::{dedent, parse_suite, unparse_suite, ParseError};
use rustpython_ast::fold::{self, Fold};
use rustpython_ast::text_size::TextRange;
use rustpython_parser::ast::{self, Constant, Expr, Stmt};
use std::convert::Infallible;

/// Canonical text of a snippet: comments and docstrings removed, keyword
/// arguments of calls sorted by name, and layout regenerated.
///
/// The snippet is dedented first so that method bodies and other indented
/// fragments normalize the same way as top-level code.
pub fn normalize_code(source: &str) -> Result<String, ParseError> {
    let suite = parse_suite(&dedent(source))?;
    let mut folder = Normalizer;
    let mut suite: Vec<Stmt> = suite
        .into_iter()
        .map(|s| match folder.fold_stmt(s) {
            Ok(s) => s,
            Err(never) => match never {},
        })
        .collect();
    strip_docstring(&mut suite);
    Ok(unparse_suite(&suite))
}

struct Normalizer;

impl Fold<TextRange> for Normalizer {
    type TargetU = TextRange;
    type Error = Infallible;
    type UserContext = ();

    fn will_map_user(&mut self, _user: &TextRange) {}

    fn map_user(&mut self, user: TextRange, _context: ()) -> Result<TextRange, Infallible> {
        Ok(user)
    }

    fn fold_expr_call(&mut self, node: ast::ExprCall) -> Result<ast::ExprCall, Infallible> {
        let mut node = fold::fold_expr_call(self, node)?;
        // `**mapping` entries keep their relative order after the named ones.
        node.keywords
            .sort_by(|a, b| (a.arg.is_none(), a.arg.as_deref()).cmp(&(b.arg.is_none(), b.arg.as_deref())));
        Ok(node)
    }

    fn fold_stmt_function_def(
        &mut self,
        node: ast::StmtFunctionDef,
    ) -> Result<ast::StmtFunctionDef, Infallible> {
        let mut node = fold::fold_stmt_function_def(self, node)?;
        strip_docstring(&mut node.body);
        Ok(node)
    }

    fn fold_stmt_async_function_def(
        &mut self,
        node: ast::StmtAsyncFunctionDef,
    ) -> Result<ast::StmtAsyncFunctionDef, Infallible> {
        let mut node = fold::fold_stmt_async_function_def(self, node)?;
        strip_docstring(&mut node.body);
        Ok(node)
    }

    fn fold_stmt_class_def(
        &mut self,
        node: ast::StmtClassDef,
    ) -> Result<ast::StmtClassDef, Infallible> {
        let mut node = fold::fold_stmt_class_def(self, node)?;
        strip_docstring(&mut node.body);
        Ok(node)
    }
}

fn strip_docstring(body: &mut Vec<Stmt>) {
    let is_doc = matches!(
        body.first(),
        Some(Stmt::Expr(ast::StmtExpr { value, .. }))
            if matches!(value.as_ref(), Expr::Constant(ast::ExprConstant { value: Constant::Str(_), .. }))
    );
    if is_doc {
        body.remove(0);
    }
}
