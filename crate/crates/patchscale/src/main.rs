fn main() -> std::process::ExitCode {
    patchscale::cli::main()
}
