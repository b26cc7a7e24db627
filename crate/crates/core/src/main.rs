fn main() -> std::process::ExitCode {
    csie::report::cli::main()
}
