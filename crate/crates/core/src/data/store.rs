//! Directory store: `manifest.txt` holding the format version line and
//! `records.csv` in the ingestion schema.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::Path;

use super::{ingest_csv, WellDataset, CSV_HEADER};
use crate::error::{Error, Result};

pub const STORE_VERSION: &str = "gvflow-store v1";

const MANIFEST: &str = "manifest.txt";
const RECORDS: &str = "records.csv";
const LOCK: &str = ".lock";

/// Writes `bytes` next to `path` and renames it into place.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::contract(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let mut file = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    file.write_all(bytes)
        .and_then(|_| file.sync_all())
        .map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn lock(dir: &Path, exclusive: bool) -> Result<File> {
    let path = dir.join(LOCK);
    let file = OpenOptions::new()
        .create(true)
        .truncate(false)
        .write(true)
        .open(&path)
        .map_err(|e| Error::io(&path, e))?;
    let locked = if exclusive {
        file.lock()
    } else {
        file.lock_shared()
    };
    locked.map_err(|e| Error::io(&path, e))?;
    Ok(file)
}

fn records_csv(ds: &WellDataset) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| Error::contract(format!("csv serialization failed: {e}"));
    writer.write_record(CSV_HEADER).map_err(io_err)?;
    for r in ds.records() {
        writer
            .write_record([
                r.station_id.clone(),
                r.lat.to_string(),
                r.long.to_string(),
                r.value.to_string(),
                r.time_index.to_string(),
            ])
            .map_err(io_err)?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::contract(format!("csv serialization failed: {e}")))
}

/// Persists the dataset under `dir`, creating it if needed.
pub fn store(ds: &WellDataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let _guard = lock(dir, true)?;
    write_atomic(&dir.join(RECORDS), &records_csv(ds)?)?;
    write_atomic(&dir.join(MANIFEST), format!("{STORE_VERSION}\n").as_bytes())
}

pub fn load(dir: &Path) -> Result<WellDataset> {
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "store directory not found"),
        ));
    }
    let _guard = lock(dir, false)?;
    let manifest_path = dir.join(MANIFEST);
    let manifest = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let version = manifest.lines().next().unwrap_or("").trim();
    if version != STORE_VERSION {
        return Err(Error::StoreVersion(version.to_string()));
    }
    let records_path = dir.join(RECORDS);
    let file = File::open(&records_path).map_err(|e| Error::io(&records_path, e))?;
    ingest_csv(file)
}
