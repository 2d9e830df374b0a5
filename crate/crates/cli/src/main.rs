fn main() {
    std::process::exit(qpriv_cli::run(std::env::args_os()));
}
