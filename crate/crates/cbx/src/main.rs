fn main() -> std::process::ExitCode {
    cbx::cli::main()
}
