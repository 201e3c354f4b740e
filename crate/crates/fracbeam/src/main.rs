use std::process::exit;

fn main() {
    exit(fracbeam::cli::main());
}
