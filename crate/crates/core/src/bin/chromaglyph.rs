fn main() {
    std::process::exit(chromaglyph::cli::run(std::env::args_os()));
}
