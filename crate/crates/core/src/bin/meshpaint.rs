fn main() -> std::process::ExitCode {
    meshpaint::cli::main()
}
