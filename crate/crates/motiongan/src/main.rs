fn main() {
    let result = motiongan::cli::run(std::env::args_os());
    if result.code == 0 {
        println!("{}", result.summary.trim_end());
    } else {
        eprintln!("{}", result.summary.trim_end());
    }
    std::process::exit(result.code);
}
