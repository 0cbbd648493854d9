use std::io::{stderr, stdout};
use std::panic;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let code = panic::catch_unwind(|| sol_geo_cli::run(args, &mut stdout().lock(), &mut stderr().lock())).unwrap_or(4);
    std::process::exit(code);
}
