fn main() -> std::process::ExitCode {
    thermoptic::cli::main_with_args(std::env::args_os())
}
