fn main() -> std::process::ExitCode {
    singlet_qkd::cli::main()
}
