//! `kurihara` command-line entry point.

fn main() {
    kurihara_cli::run()
}

mod kurihara_cli {
    pub fn run() {
        eprintln!("cli wiring pending");
        std::process::exit(2)
    }
}
