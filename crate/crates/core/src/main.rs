fn main() {
    std::process::exit(hav_profiler::cli::main_with_args(std::env::args_os()));
}
