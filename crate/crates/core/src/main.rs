fn main() {
    std::process::exit(coedit::cli::dispatch(std::env::args_os()));
}
