fn main() {
    std::process::exit(dqc1::cli::main_with_args(std::env::args_os()));
}
