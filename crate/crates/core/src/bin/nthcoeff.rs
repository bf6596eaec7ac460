fn main() {
    nthcoeff::cli::main();
}
