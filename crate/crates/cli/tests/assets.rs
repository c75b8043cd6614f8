//! The files under `assets/` must match what the code renders. Run with
//! `GTR_BLESS=1` to rewrite them after an intentional change.

use std::path::PathBuf;

#[test]
fn assets_match_the_code() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets");
    let bless = std::env::var_os("GTR_BLESS").is_some();
    for (name, text) in gtr_cli::assets::files() {
        let path = root.join(name);
        if bless {
            std::fs::create_dir_all(path.parent().unwrap()).unwrap();
            std::fs::write(&path, &text).unwrap();
            continue;
        }
        let on_disk = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(on_disk, text, "{} is stale; rerun with GTR_BLESS=1", path.display());
    }
}
