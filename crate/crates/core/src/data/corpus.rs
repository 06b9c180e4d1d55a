//! On-disk binary corpus: a directory of files plus a `labels.csv` manifest
//! (`path,label` header, then one `relative_path,label` line per file).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::cache::write_atomic;
use super::synth::SyntheticFile;
use super::DataError;

pub const MANIFEST: &str = "labels.csv";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub path: PathBuf,
    pub label: u8,
}

pub fn parse_manifest(text: &str) -> Result<Vec<CorpusEntry>, DataError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "path,label" => {}
        _ => return Err(DataError::Invalid("manifest must start with `path,label`".into())),
    }
    let mut entries = Vec::new();
    for (no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (path, label) = line
            .rsplit_once(',')
            .ok_or_else(|| DataError::Invalid(format!("manifest line {}: missing label", no + 1)))?;
        let label = match label.trim() {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(DataError::Invalid(format!("manifest line {}: label `{other}`", no + 1)));
            }
        };
        entries.push(CorpusEntry { path: PathBuf::from(path.trim()), label });
    }
    Ok(entries)
}

/// Reads the manifest and every file it lists.
pub fn read_corpus(dir: impl AsRef<Path>) -> Result<Vec<(Vec<u8>, u8)>, DataError> {
    let dir = dir.as_ref();
    let manifest = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&manifest).map_err(|e| DataError::io(&manifest, e))?;
    parse_manifest(&text)?
        .into_iter()
        .map(|entry| {
            let path = dir.join(&entry.path);
            let bytes = std::fs::read(&path).map_err(|e| DataError::io(&path, e))?;
            Ok((bytes, entry.label))
        })
        .collect()
}

pub fn write_corpus(dir: impl AsRef<Path>, files: &[SyntheticFile]) -> Result<(), DataError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| DataError::io(dir, e))?;
    let mut manifest = String::from("path,label\n");
    for f in files {
        let path = dir.join(&f.name);
        std::fs::write(&path, &f.bytes).map_err(|e| DataError::io(&path, e))?;
        writeln!(manifest, "{},{}", f.name, f.label).expect("writing to a String");
    }
    write_atomic(&dir.join(MANIFEST), manifest.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth::synth_binary_corpus;

    #[test]
    fn manifest_parsing() {
        let entries = parse_manifest("path,label\na.bin,0\nsub/b,1.bin,1\n\n").unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[1].path, PathBuf::from("sub/b,1.bin"));
        assert_eq!(entries[1].label, 1);
        assert!(parse_manifest("file,class\n").is_err());
        assert!(parse_manifest("path,label\nx.bin,2\n").is_err());
        assert!(parse_manifest("path,label\nx.bin\n").is_err());
    }

    #[test]
    fn round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let files = synth_binary_corpus(3, 5);
        write_corpus(dir.path(), &files).unwrap();
        let back = read_corpus(dir.path()).unwrap();
        assert_eq!(back.len(), 6);
        for (f, (bytes, label)) in files.iter().zip(&back) {
            assert_eq!(&f.bytes, bytes);
            assert_eq!(f.label, *label);
        }
        std::fs::remove_file(dir.path().join(&files[2].name)).unwrap();
        assert!(matches!(read_corpus(dir.path()), Err(DataError::Io { .. })));
    }
}
