use std::path::PathBuf;

use rbmg::mesh::{load_mesh, validate};
use rbmg::vem::assemble;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

#[test]
fn eight_cell_reference_mesh() {
    let m = load_mesh(fixture("mesh_8cells.json")).unwrap();
    assert_eq!(m.num_cells(), 8);
    assert!((m.total_area() - 1.0).abs() < 1e-12);
    assert!(validate(&m).is_valid());
    let s = assemble(&m, |_| 1.0).unwrap();
    assert!(s.num_dofs() > 0);
}

#[test]
fn mesh_with_missing_vertex_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("mesh_8cells.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["cells"][0][0] = serde_json::json!(10_000);
    let p = dir.path().join("broken.json");
    std::fs::write(&p, v.to_string()).unwrap();
    assert!(matches!(load_mesh(&p), Err(rbmg::Error::IndexOutOfRange(_))));
}
