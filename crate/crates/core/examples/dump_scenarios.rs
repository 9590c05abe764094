use dyson_lab::harness::checks::builtin_scenarios;
fn main() {
    let dir = std::path::Path::new("scenarios");
    std::fs::create_dir_all(dir).unwrap();
    let mut names = Vec::new();
    for s in builtin_scenarios() {
        let path = dir.join(format!("{}.toml", s.name));
        std::fs::write(&path, s.to_toml_string()).unwrap();
        names.push(format!("{}.toml", s.name));
        println!("wrote {}", path.display());
    }
    let suite = format!(
        "scenarios = [\n{}\n]\n",
        names
            .iter()
            .map(|n| format!("    \"{n}\","))
            .collect::<Vec<_>>()
            .join("\n")
    );
    std::fs::write(dir.join("suite.toml"), suite).unwrap();
    println!("wrote scenarios/suite.toml");
}
