fn main() {
    std::process::exit(cubex::cli::main_with_args(std::env::args_os()));
}
