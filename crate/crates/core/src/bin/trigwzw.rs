fn main() {
    let out = trigwzw::cli::run(std::env::args().collect());
    if let Some(m) = &out.message {
        eprintln!("{m}");
    }
    if !out.json.is_null() {
        println!("{}", serde_json::to_string_pretty(&out.json).expect("JSON values serialize"));
    }
    std::process::exit(out.code);
}
