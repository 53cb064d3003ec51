fn main() { std::process::exit(maxmin_rank::cli::main()); }
