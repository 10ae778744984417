use std::sync::OnceLock;

use phonon_boltzmann::cache::{crc32, decode, encode, load, save};
use phonon_boltzmann::kernel::{assemble_kernel, KernelTable};
use phonon_boltzmann::Error;

fn table() -> &'static KernelTable {
    static TABLE: OnceLock<KernelTable> = OnceLock::new();
    TABLE.get_or_init(|| assemble_kernel(16, 1e-8).unwrap())
}

#[test]
fn round_trip_is_bitwise() {
    let original = table();
    let restored = decode(&encode(original)).unwrap();
    assert_eq!(original.grid.n, restored.grid.n);
    assert_eq!(original.quad_tol, restored.quad_tol);
    assert_eq!(original.v0.to_bits(), restored.v0.to_bits());
    assert_eq!(original.c1.to_bits(), restored.c1.to_bits());
    assert_eq!(original.c2.to_bits(), restored.c2.to_bits());
    for i in 0..original.grid.n {
        assert_eq!(original.v[i].to_bits(), restored.v[i].to_bits());
        for j in 0..original.grid.n {
            assert_eq!(
                original.entry(i, j).to_bits(),
                restored.entry(i, j).to_bits()
            );
        }
    }
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.phnk");
    save(table(), &path).unwrap();
    let restored = load(&path).unwrap();
    assert_eq!(table().v0.to_bits(), restored.v0.to_bits());
}

#[test]
fn missing_file_is_an_io_error() {
    match load(std::path::Path::new("/nonexistent/t.phnk")) {
        Err(Error::Io(_)) => {}
        other => panic!("expected Io, got {other:?}"),
    }
}

#[test]
fn crc_catches_any_single_byte_flip() {
    let bytes = encode(table());
    for pos in (0..bytes.len()).step_by(97) {
        let mut bad = bytes.clone();
        bad[pos] ^= 0x40;
        match decode(&bad) {
            Err(Error::CacheFormat(_)) => {}
            other => panic!("flip at byte {pos} went undetected: {other:?}"),
        }
    }
}

#[test]
fn truncation_and_garbage_are_format_errors() {
    let bytes = encode(table());
    assert!(matches!(
        decode(&bytes[..bytes.len() - 9]),
        Err(Error::CacheFormat(_))
    ));
    assert!(matches!(decode(&bytes[..3]), Err(Error::CacheFormat(_))));
    assert!(matches!(
        decode(b"not a kernel cache at all"),
        Err(Error::CacheFormat(_))
    ));

    let mut wrong_magic = bytes.clone();
    wrong_magic[0] = b'X';
    assert!(matches!(decode(&wrong_magic), Err(Error::CacheFormat(_))));
}

#[test]
fn crc_reference_vector() {
    assert_eq!(crc32(b"123456789"), 0xCBF4_3926);
    assert_eq!(crc32(b""), 0);
}
