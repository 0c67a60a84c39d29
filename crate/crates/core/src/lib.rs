pub mod cli;
pub mod config;
pub mod context;
pub mod edit;
pub mod instance;
pub mod metrics;
pub mod miner;
pub mod python;
pub mod sim;
