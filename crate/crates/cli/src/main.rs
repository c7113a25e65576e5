fn main() {
    let out = wallkit_cli::run(std::env::args_os());
    if let Some(msg) = &out.message {
        print!("{msg}");
        std::process::exit(out.code);
    }
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(e) = out.summary.get("error").and_then(|e| e.as_str()) {
        eprintln!("error: {e}");
    }
    println!("{}", out.summary_line());
    std::process::exit(out.code);
}
