fn main() -> std::process::ExitCode {
    cncdir::cli::main()
}
