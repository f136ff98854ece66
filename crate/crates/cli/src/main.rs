fn main() {
    let result = prony2d_cli::run(std::env::args_os());
    std::process::exit(result.exit_code);
}
