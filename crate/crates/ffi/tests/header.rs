use std::path::Path;
use std::process::Command;

/// The generated header must compile as C and declare the public entry points.
#[test]
fn header_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/posesync.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["ps_graph_from_json", "ps_synchronize", "ps_sync_result_free", "PS_STATUS_OK", "PsPose"] {
        assert!(text.contains(sym), "header lacks {sym}");
    }

    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"posesync.h\"\n\
         int main(void) { PsPose a = {1, 2, 0}; PsPose b; \
         return ps_pose_inverse(&a, &b) == PS_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let status = match Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&src)
        .status()
    {
        Ok(s) => s,
        Err(_) => {
            eprintln!("no C compiler found, skipping syntax check");
            return;
        }
    };
    assert!(status.success());
}
