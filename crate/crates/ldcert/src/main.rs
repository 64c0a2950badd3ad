fn main() -> std::process::ExitCode {
    ldcert::cli::main_with_args(std::env::args_os())
}
