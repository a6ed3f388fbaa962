fn main() {
    std::process::exit(datadump::cli::main_with_args(std::env::args_os()));
}
