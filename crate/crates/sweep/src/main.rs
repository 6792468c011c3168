fn main() {
    std::process::exit(pdarray_sweep::run(std::env::args_os()));
}
