use std::process::exit;

fn main() {
    exit(seminfo::cli::run(std::env::args_os()) as i32)
}
