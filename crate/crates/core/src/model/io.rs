//! Embedding dump format: one JSON header line, then raw little-endian f32
//! rows, users first then items, row-major.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

use super::EmbeddingTable;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct EmbeddingHeader {
    pub num_users: usize,
    pub num_items: usize,
    pub d: usize,
    pub backbone: String,
    pub seed: u64,
}

/// Write table + header to `path`. Values are narrowed to f32.
pub fn save_embeddings(
    path: &Path,
    table: &EmbeddingTable,
    backbone: &str,
    seed: u64,
) -> Result<()> {
    let header = EmbeddingHeader {
        num_users: table.num_users(),
        num_items: table.num_items(),
        d: table.dim(),
        backbone: backbone.to_string(),
        seed,
    };
    let mut buf =
        Vec::with_capacity(64 + 4 * (table.num_users() + table.num_items()) * table.dim());
    serde_json::to_writer(&mut buf, &header).map_err(|e| CoreError::Format(e.to_string()))?;
    buf.push(b'\n');
    for &x in table.users().iter() {
        buf.extend_from_slice(&(x as f32).to_le_bytes());
    }
    for &x in table.items().iter() {
        buf.extend_from_slice(&(x as f32).to_le_bytes());
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

/// Load a dump, validating the header against the payload length.
pub fn load_embeddings(path: &Path) -> Result<(EmbeddingHeader, EmbeddingTable)> {
    let mut raw = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut raw)?;
    let nl = raw
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| CoreError::Format("missing header line".into()))?;
    let header: EmbeddingHeader = serde_json::from_slice(&raw[..nl])
        .map_err(|e| CoreError::Format(format!("bad header: {e}")))?;
    let payload = &raw[nl + 1..];
    let expect = 4 * (header.num_users + header.num_items) * header.d;
    if payload.len() != expect {
        return Err(CoreError::Format(format!(
            "payload length {} != expected {} for {}x{}x{}",
            payload.len(),
            expect,
            header.num_users,
            header.num_items,
            header.d
        )));
    }
    let mut values = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64);
    let users = Array2::from_shape_fn((header.num_users, header.d), |_| values.next().unwrap());
    let items = Array2::from_shape_fn((header.num_items, header.d), |_| values.next().unwrap());
    let table = EmbeddingTable::from_arrays(users, items)?;
    if !table.all_finite() {
        return Err(CoreError::Format("non-finite embedding values".into()));
    }
    Ok((header, table))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_f32_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.bin");
        let table = EmbeddingTable::init(7, 5, 8, 42, 0.1);
        save_embeddings(&path, &table, "mf", 42).unwrap();
        let (header, loaded) = load_embeddings(&path).unwrap();
        assert_eq!(header.num_users, 7);
        assert_eq!(header.num_items, 5);
        assert_eq!(header.d, 8);
        assert_eq!(header.backbone, "mf");
        for (a, b) in table.users().iter().zip(loaded.users().iter()) {
            assert_eq!(*a as f32, *b as f32);
        }
        // Saving the loaded table again is byte-identical (f32 fixed point).
        let path2 = dir.path().join("emb2.bin");
        save_embeddings(&path2, &loaded, "mf", 42).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.bin");
        let table = EmbeddingTable::init(3, 3, 4, 1, 0.1);
        save_embeddings(&path, &table, "mf", 1).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 4);
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_embeddings(&path), Err(CoreError::Format(_))));
    }
}
