mod common;

use std::fs;

use common::{rng, unit_grid, WELL_TABLE};
use gvflow::data::{
    export_raster, ingest_csv, ingest_csv_path, load, read_raster_csv, samples_at, store,
    surface_from_raster, RasterFormat, WellDataset, WellRecord,
};
use gvflow::{Adjacency, GridDomain, HeadSurface, LatLong, LevelScale};
use proptest::prelude::*;
use rand::Rng;

fn record() -> impl Strategy<Value = WellRecord> {
    (
        "[A-Za-z0-9_,\"-]{1,8}",
        -90.0f64..=90.0,
        -180.0f64..=180.0,
        prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO,
        0u32..6,
    )
        .prop_map(|(station_id, lat, long, value, time_index)| WellRecord {
            station_id,
            lat,
            long,
            value,
            time_index,
        })
}

fn unique_records() -> impl Strategy<Value = Vec<WellRecord>> {
    prop::collection::vec(record(), 1..40).prop_map(|mut v| {
        let mut seen = std::collections::BTreeSet::new();
        v.retain(|r| seen.insert((r.station_id.clone(), r.time_index)));
        v
    })
}

fn to_csv(records: &[WellRecord]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["station_id", "lat", "long", "value", "time_index"]).unwrap();
    for r in records {
        w.write_record([
            r.station_id.clone(),
            format!("{:?}", r.lat),
            format!("{:?}", r.long),
            format!("{:e}", r.value),
            r.time_index.to_string(),
        ])
        .unwrap();
    }
    w.into_inner().unwrap()
}

fn bits(ds: &WellDataset) -> Vec<(String, u64, u64, u64, u32)> {
    ds.records()
        .iter()
        .map(|r| {
            (
                r.station_id.clone(),
                r.lat.to_bits(),
                r.long.to_bits(),
                r.value.to_bits(),
                r.time_index,
            )
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ingest_store_load_is_bit_exact(records in unique_records()) {
        let ds = ingest_csv(to_csv(&records).as_slice()).unwrap();
        prop_assert_eq!(ds.len(), records.len());
        let dir = tempfile::tempdir().unwrap();
        store(&ds, dir.path()).unwrap();
        let back = load(dir.path()).unwrap();
        prop_assert_eq!(bits(&back), bits(&ds));

        let mut expected = records.clone();
        expected.sort_by(|a, b| (&a.station_id, a.time_index).cmp(&(&b.station_id, b.time_index)));
        prop_assert_eq!(ds.records(), expected.as_slice());
    }

    #[test]
    fn row_order_does_not_matter(records in unique_records(), seed in any::<u64>()) {
        let mut shuffled = records.clone();
        let mut r = rng(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, r.random_range(0..=i));
        }
        let a = ingest_csv(to_csv(&records).as_slice()).unwrap();
        let b = ingest_csv(to_csv(&shuffled).as_slice()).unwrap();
        prop_assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn raster_csv_round_trip(
        rows in 2usize..9,
        cols in 2usize..9,
        seed in any::<u64>(),
    ) {
        let grid = unit_grid(rows, cols);
        let mut r = rng(seed);
        let values: Vec<f64> = (0..grid.len()).map(|_| r.random_range(-1e6..1e6)).collect();
        let scale = LevelScale::new(10, 1.0).unwrap();
        let surface = HeadSurface::new(grid.domain(), values, scale).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        export_raster(&surface, &grid, &path, RasterFormat::Csv).unwrap();
        let raster = read_raster_csv(&path).unwrap();
        prop_assert_eq!(raster.len(), rows);
        let back = surface_from_raster(&grid, &raster, scale).unwrap();
        for (x, y) in back.values().iter().zip(surface.values()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn pgm_spans_full_range(
        rows in 2usize..9,
        cols in 2usize..9,
        seed in any::<u64>(),
    ) {
        let grid = unit_grid(rows, cols);
        let mut r = rng(seed);
        let values: Vec<f64> = (0..grid.len()).map(|_| r.random_range(0.0..300.0)).collect();
        let surface = HeadSurface::new(grid.domain(), values, LevelScale::new(300, 1.0).unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.pgm");
        export_raster(&surface, &grid, &path, RasterFormat::Pgm).unwrap();
        let bytes = fs::read(&path).unwrap();
        let header = format!("P5\n{cols} {rows}\n255\n");
        prop_assert!(bytes.starts_with(header.as_bytes()));
        let pixels = &bytes[header.len()..];
        prop_assert_eq!(pixels.len(), rows * cols);
        prop_assert!(pixels.contains(&0) && pixels.contains(&255));
    }

    #[test]
    fn every_record_lands_in_exactly_one_slice(records in unique_records()) {
        let ds = ingest_csv(to_csv(&records).as_slice()).unwrap();
        let (sw, ne) = ds.bbox();
        let pad = 1e-3;
        let grid = GridDomain::build(
            LatLong::new((sw.lat - pad).max(-90.0), (sw.long - pad).max(-180.0)),
            LatLong::new((ne.lat + pad).min(90.0), (ne.long + pad).min(180.0)),
            4,
            5,
            Adjacency::Four,
        )
        .unwrap();
        let scale = LevelScale::new(10, 1.0).unwrap();
        let mut total = 0;
        for t in ds.times() {
            let slice = samples_at(&ds, t, &grid, scale).unwrap();
            let here = ds.records_at(t).count();
            prop_assert_eq!(slice.samples.len() + slice.collisions, here);
            total += here;
        }
        prop_assert_eq!(total, ds.len());
    }
}

#[test]
fn table_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wells.csv");
    fs::write(&path, WELL_TABLE).unwrap();
    let ds = ingest_csv_path(&path).unwrap();
    assert_eq!(ds.len(), 8);
    assert_eq!(ds.time_range(), (0, 0));
    store(&ds, &dir.path().join("store")).unwrap();
    assert_eq!(bits(&load(&dir.path().join("store")).unwrap()), bits(&ds));
}

#[test]
fn constant_surface_gives_black_pgm() {
    let grid = unit_grid(3, 4);
    let surface = HeadSurface::constant(grid.domain(), 7.5, LevelScale::new(10, 1.0).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.pgm");
    export_raster(&surface, &grid, &path, RasterFormat::Pgm).unwrap();
    let bytes = fs::read(&path).unwrap();
    assert!(bytes[bytes.len() - 12..].iter().all(|&b| b == 0));
}
