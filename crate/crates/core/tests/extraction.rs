mod common;

use ftklipse_core::{AdapterKind, Casework};
use rand::Rng;

#[test]
fn extracted_children_equal_direct_slices() {
    let mut rng = common::seeded_rng("extraction");
    let src = tempfile::tempdir().unwrap();
    let root = tempfile::tempdir().unwrap();
    let work = Casework::open(root.path(), AdapterKind::File).unwrap();
    let case = work.create_case("extract", "tester").unwrap();
    let have_cli = common::have_sha256sum();

    for i in 0..100 {
        let len = rng.random_range(1..=64 * 1024);
        let bytes = common::random_bytes(&mut rng, len);
        let path = common::write_file(src.path(), &format!("f{i}"), &bytes);
        let ev = work.import_evidence(case.id, &path, "tester").unwrap();
        let offset = rng.random_range(0..len as u64);
        let length = rng.random_range(1..=len as u64 - offset);
        let child = work
            .extract_region(ev.id, offset, length, &format!("part{i}"), "tester")
            .unwrap();
        let oracle = common::read_slice(&path, offset, length);
        let child_path = work.evidence_path(&child);
        assert_eq!(std::fs::read(&child_path).unwrap(), oracle);
        assert_eq!(child.size_bytes, length);
        if have_cli {
            let oracle_path = common::write_file(src.path(), &format!("oracle{i}"), &oracle);
            assert_eq!(Some(child.reference_hash.clone()), common::sha256sum(&oracle_path));
        }
    }
}

#[test]
fn out_of_bounds_regions_are_rejected_without_side_effects() {
    let src = tempfile::tempdir().unwrap();
    let root = tempfile::tempdir().unwrap();
    let work = Casework::open(root.path(), AdapterKind::File).unwrap();
    let case = work.create_case("extract", "tester").unwrap();
    let ev = work
        .import_evidence(case.id, &common::write_file(src.path(), "f", &[7u8; 8]), "tester")
        .unwrap();
    let counter = work.store().read_id_counter().unwrap();
    for (offset, length) in [(0, 0), (0, 9), (8, 1), (7, 2), (u64::MAX, 2)] {
        assert!(work.extract_region(ev.id, offset, length, "x", "tester").is_err());
    }
    assert!(work.extract_region(ev.id, 0, 1, "  ", "tester").is_err());
    assert_eq!(work.store().read_id_counter().unwrap(), counter);
    assert_eq!(work.case(case.id).unwrap().evidences.len(), 1);
    let leftovers: Vec<_> = std::fs::read_dir(work.case_dir(case.id))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(leftovers.len(), 1, "{leftovers:?}");
}
