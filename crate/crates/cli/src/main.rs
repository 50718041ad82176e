use clap::Parser;
use gspp_cli::app;

fn main() {
    let cli = match app::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = app::run(cli) {
        eprintln!("error: {}", e);
        std::process::exit(e.exit_code());
    }
}
