use clap::Parser;

fn main() {
    let cli = match omri_cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are success; bad arguments are validation
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match omri_cli::run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
