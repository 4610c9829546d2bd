fn main() {
    std::process::exit(omnigeom::cli::main_with(std::env::args_os()));
}
