use ssakit_service::{app, Config};

fn env_usize(name: &str, default: usize) -> usize {
    match std::env::var(name) {
        Ok(v) => v.trim().parse().unwrap_or_else(|_| {
            eprintln!("ignoring {name}={v}: not a positive integer");
            default
        }),
        Err(_) => default,
    }
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let defaults = Config::default();
    let config = Config {
        max_series_len: env_usize("SSAKIT_MAX_SERIES", defaults.max_series_len),
        max_sessions: env_usize("SSAKIT_MAX_SESSIONS", defaults.max_sessions),
        cors_origin: std::env::var("SSAKIT_CORS_ORIGIN").ok(),
    };
    let addr = std::env::var("SSAKIT_ADDR").unwrap_or_else(|_| "127.0.0.1:8080".into());
    let listener = tokio::net::TcpListener::bind(&addr).await?;
    eprintln!("listening on {addr}");
    axum::serve(listener, app(config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
