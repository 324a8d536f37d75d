use std::io;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EFP_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let code = efp_core::cli::run(std::env::args_os(), &mut io::stdout().lock());
    std::process::exit(code);
}
