//! CSV serialization of collected datasets.
//!
//! A file starts with one metadata line
//!
//! ```text
//! # spinsq-dataset v1 pattern=all-pairs n=10 k=82 seed=7
//! ```
//!
//! followed by a column header and one row per outcome:
//!
//! | pattern        | columns                              |
//! |----------------|--------------------------------------|
//! | total-spin     | `direction,rep,outcome2m`            |
//! | all-pairs      | `direction,i,j,rep,si2,sj2`          |
//! | split-single   | `direction,i,j,rep,who,who_s2`       |
//! | random-pairs   | `slot,direction,i,j,rep,si2,sj2`     |
//! | random-split   | `slot,direction,i,j,rep,who,who_s2`  |
//!
//! Outcomes are `2m` for total spin and `+1`/`-1` for single qubits. In
//! split rows `who` is `first` (qubit `i`) or `second` (qubit `j`) and `rep` counts the `K/2` runs of that
//! qubit. Loaded blocks get an id hashed from their content, so loading the
//! same file twice yields blocks that cannot back two terms of one estimate.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hasher;
use std::io::{BufRead, BufReader, Read, Write};

use fnv::FnvHasher;

use super::data::{PairPatternDataset, PairSeries, Pattern, TotalSpinDataset, TotalSpinSeries};
use crate::error::{Error, Result};
use crate::states::Direction;

pub const SCHEMA: &str = "spinsq-dataset v1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dataset {
    TotalSpin(TotalSpinDataset),
    Pairs(PairPatternDataset),
}

impl Dataset {
    pub fn pattern_name(&self) -> &'static str {
        match self {
            Dataset::TotalSpin(_) => "total-spin",
            Dataset::Pairs(ds) => ds.pattern.name(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            Dataset::TotalSpin(ds) => ds.n_qubits,
            Dataset::Pairs(ds) => ds.n_qubits,
        }
    }
}

/// Free-form `key=value` pairs carried on the metadata line (seed, state,
/// configuration hash, ...).
pub type Metadata = BTreeMap<String, String>;

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn metadata_line(dataset: &Dataset, extra: &Metadata) -> String {
    let mut line = format!("# {SCHEMA} pattern={} n={}", dataset.pattern_name(), dataset.n_qubits());
    if let Dataset::Pairs(ds) = dataset {
        line.push_str(&format!(" k={}", ds.k));
    }
    for (key, value) in extra {
        line.push_str(&format!(" {key}={value}"));
    }
    line.push('\n');
    line
}

pub fn write_dataset<W: Write>(dataset: &Dataset, extra: &Metadata, mut out: W) -> Result<()> {
    out.write_all(metadata_line(dataset, extra).as_bytes())
        .map_err(io_err)?;
    let mut w = csv::Writer::from_writer(out);
    match dataset {
        Dataset::TotalSpin(ds) => {
            w.write_record(["direction", "rep", "outcome2m"]).map_err(csv_err)?;
            for s in ds.blocks.iter().flatten() {
                for (rep, v) in s.outcomes.iter().enumerate() {
                    w.write_record([s.direction.to_string(), rep.to_string(), v.to_string()])
                        .map_err(csv_err)?;
                }
            }
        }
        Dataset::Pairs(ds) => {
            let random = ds.pattern.is_random();
            let mut header = vec!["direction", "i", "j", "rep"];
            if random {
                header.insert(0, "slot");
            }
            header.extend(if ds.pattern.is_split() {
                ["who", "who_s2"]
            } else {
                ["si2", "sj2"]
            });
            w.write_record(&header).map_err(csv_err)?;
            for s in ds.blocks.iter().flatten() {
                for (slot, &(i, j)) in s.pairs.iter().enumerate() {
                    let (first, second) = s.slot(slot);
                    let mut prefix = Vec::with_capacity(7);
                    if random {
                        prefix.push(slot.to_string());
                    }
                    prefix.extend([s.direction.to_string(), i.to_string(), j.to_string()]);
                    for rep in 0..s.reps {
                        let mut rows = Vec::with_capacity(2);
                        if ds.pattern.is_split() {
                            rows.push(["first".to_string(), first[rep].to_string()]);
                            rows.push(["second".to_string(), second[rep].to_string()]);
                        } else {
                            rows.push([first[rep].to_string(), second[rep].to_string()]);
                        }
                        for tail in rows {
                            let mut row = prefix.clone();
                            row.push(rep.to_string());
                            row.extend(tail);
                            w.write_record(&row).map_err(csv_err)?;
                        }
                    }
                }
            }
        }
    }
    w.flush().map_err(io_err)
}

fn parse_metadata(line: &str) -> Result<(String, Metadata)> {
    let rest = line
        .trim()
        .strip_prefix('#')
        .map(str::trim)
        .and_then(|l| l.strip_prefix(SCHEMA))
        .ok_or_else(|| Error::Parse(format!("missing '# {SCHEMA}' metadata line")))?;
    let mut meta = Metadata::new();
    for token in rest.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("metadata token '{token}' is not key=value")))?;
        meta.insert(key.to_string(), value.to_string());
    }
    let pattern = meta
        .remove("pattern")
        .ok_or_else(|| Error::Parse("metadata has no pattern".into()))?;
    Ok((pattern, meta))
}

fn take_usize(meta: &mut Metadata, key: &str) -> Result<usize> {
    let raw = meta
        .remove(key)
        .ok_or_else(|| Error::Parse(format!("metadata has no {key}")))?;
    raw.parse()
        .map_err(|_| Error::Parse(format!("metadata {key}='{raw}' is not an integer")))
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, line: u64) -> Result<T> {
    let raw = record.get(idx).unwrap_or("");
    raw.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: cannot parse '{raw}' in column {}", idx + 1)))
}

fn content_id(parts: &[&[u8]]) -> u64 {
    let mut h = FnvHasher::default();
    for p in parts {
        h.write(p);
        h.write_u8(0xff);
    }
    h.finish()
}

/// Reads a dataset written by [`write_dataset`], returning it together with
/// the extra metadata.
pub fn read_dataset<R: Read>(input: R) -> Result<(Dataset, Metadata)> {
    let mut buf = BufReader::new(input);
    let mut first = String::new();
    buf.read_line(&mut first).map_err(io_err)?;
    let (pattern_name, mut meta) = parse_metadata(&first)?;
    let n_qubits = take_usize(&mut meta, "n")?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(buf);
    let records: Vec<(u64, csv::StringRecord)> = reader
        .records()
        .map(|r| {
            let r = r.map_err(csv_err)?;
            // the metadata line precedes the csv reader's first line
            let line = r.position().map_or(0, |p| p.line() + 1);
            Ok((line, r))
        })
        .collect::<Result<_>>()?;
    if pattern_name == "total-spin" {
        let ds = read_total_spin(n_qubits, &records)?;
        return Ok((Dataset::TotalSpin(ds), meta));
    }
    let pattern = match pattern_name.as_str() {
        "all-pairs" => Pattern::AllPairs,
        "split-single" => Pattern::SplitSingle,
        "random-pairs" => Pattern::RandomPairs,
        "random-split" => Pattern::RandomSplit,
        other => return Err(Error::Parse(format!("unknown pattern '{other}'"))),
    };
    let k = take_usize(&mut meta, "k")?;
    let ds = read_pairs(pattern, n_qubits, k, &records)?;
    Ok((Dataset::Pairs(ds), meta))
}

fn read_total_spin(n_qubits: usize, records: &[(u64, csv::StringRecord)]) -> Result<TotalSpinDataset> {
    let mut by_dir: [Vec<Option<i32>>; 3] = Default::default();
    for (line, r) in records {
        let d: Direction = field(r, 0, *line)?;
        let rep: usize = field(r, 1, *line)?;
        let v: i32 = field(r, 2, *line)?;
        if v.unsigned_abs() as usize > n_qubits || (v + n_qubits as i32) % 2 != 0 {
            return Err(Error::Parse(format!(
                "line {line}: 2m = {v} impossible for {n_qubits} qubits"
            )));
        }
        let slots = &mut by_dir[d.index()];
        if slots.len() <= rep {
            slots.resize(rep + 1, None);
        }
        if slots[rep].replace(v).is_some() {
            return Err(Error::Parse(format!("line {line}: duplicate {d} repetition {rep}")));
        }
    }
    let mut blocks: [Option<TotalSpinSeries>; 3] = Default::default();
    for d in Direction::ALL {
        let slots = std::mem::take(&mut by_dir[d.index()]);
        if slots.is_empty() {
            continue;
        }
        let outcomes: Vec<i32> = slots
            .into_iter()
            .enumerate()
            .map(|(rep, v)| v.ok_or_else(|| Error::Parse(format!("{d} repetition {rep} missing"))))
            .collect::<Result<_>>()?;
        let bytes: Vec<u8> = outcomes.iter().flat_map(|v| v.to_le_bytes()).collect();
        let id = content_id(&[b"total-spin", d.to_string().as_bytes(), &bytes]);
        blocks[d.index()] = Some(TotalSpinSeries {
            id,
            direction: d,
            outcomes,
        });
    }
    Ok(TotalSpinDataset { n_qubits, blocks })
}

struct SlotBuilder {
    pair: (u32, u32),
    first: Vec<Option<i8>>,
    second: Vec<Option<i8>>,
}

fn read_pairs(
    pattern: Pattern,
    n_qubits: usize,
    k: usize,
    records: &[(u64, csv::StringRecord)],
) -> Result<PairPatternDataset> {
    let reps = if pattern.is_split() { k / 2 } else { k };
    let offset = usize::from(pattern.is_random());
    let mut slots: [Vec<SlotBuilder>; 3] = Default::default();
    let mut index: [HashMap<u64, usize>; 3] = Default::default();
    for (line, r) in records {
        let line = *line;
        let d: Direction = field(r, offset, line)?;
        let i: u32 = field(r, offset + 1, line)?;
        let j: u32 = field(r, offset + 2, line)?;
        let rep: usize = field(r, offset + 3, line)?;
        let key = if pattern.is_random() {
            field::<u64>(r, 0, line)?
        } else {
            (i as u64) << 32 | j as u64
        };
        if rep >= reps {
            return Err(Error::Parse(format!("line {line}: repetition {rep} >= {reps}")));
        }
        let list = &mut slots[d.index()];
        let pos = *index[d.index()].entry(key).or_insert_with(|| {
            list.push(SlotBuilder {
                pair: (i, j),
                first: vec![None; reps],
                second: vec![None; reps],
            });
            list.len() - 1
        });
        let slot = &mut list[pos];
        if slot.pair != (i, j) {
            return Err(Error::Parse(format!(
                "line {line}: slot holds pair {:?}, row says ({i}, {j})",
                slot.pair
            )));
        }
        let outcome = |idx: usize| -> Result<i8> {
            match field::<i8>(r, idx, line)? {
                v @ (1 | -1) => Ok(v),
                v => Err(Error::Parse(format!("line {line}: outcome {v} is not +1 or -1"))),
            }
        };
        let writes: Vec<(bool, i8)> = if pattern.is_split() {
            let who = r.get(offset + 4).unwrap_or("").trim();
            let is_first = match who {
                "first" => true,
                "second" => false,
                other => {
                    return Err(Error::Parse(format!(
                        "line {line}: who = '{other}', expected first or second"
                    )))
                }
            };
            vec![(is_first, outcome(offset + 5)?)]
        } else {
            vec![(true, outcome(offset + 4)?), (false, outcome(offset + 5)?)]
        };
        for (is_first, v) in writes {
            let cell = if is_first {
                &mut slot.first[rep]
            } else {
                &mut slot.second[rep]
            };
            if cell.replace(v).is_some() {
                return Err(Error::Parse(format!(
                    "line {line}: duplicate outcome for ({i}, {j}) repetition {rep}"
                )));
            }
        }
    }
    let mut blocks: [Option<PairSeries>; 3] = Default::default();
    for d in Direction::ALL {
        let built = std::mem::take(&mut slots[d.index()]);
        if built.is_empty() {
            continue;
        }
        let mut pairs = Vec::with_capacity(built.len());
        let mut first = Vec::with_capacity(built.len() * reps);
        let mut second = Vec::with_capacity(built.len() * reps);
        for s in built {
            pairs.push(s.pair);
            for (a, b) in s.first.into_iter().zip(s.second) {
                match (a, b) {
                    (Some(a), Some(b)) => {
                        first.push(a);
                        second.push(b);
                    }
                    _ => return Err(Error::Parse(format!("{d}: pair {:?} is missing outcomes", s.pair))),
                }
            }
        }
        let pair_bytes: Vec<u8> = pairs
            .iter()
            .flat_map(|&(i, j)| [i.to_le_bytes(), j.to_le_bytes()].concat())
            .collect();
        let as_bytes = |v: &[i8]| v.iter().map(|&x| x as u8).collect::<Vec<u8>>();
        let id = content_id(&[
            pattern.name().as_bytes(),
            d.to_string().as_bytes(),
            &pair_bytes,
            &as_bytes(&first),
            &as_bytes(&second),
        ]);
        blocks[d.index()] = Some(PairSeries {
            id,
            direction: d,
            pairs,
            reps,
            first,
            second,
        });
    }
    let ds = PairPatternDataset {
        pattern,
        n_qubits,
        k,
        blocks,
    };
    for d in Direction::ALL {
        if ds.blocks[d.index()].is_some() {
            ds.block(d)?;
        }
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::data::*;
    use crate::states::{StateModel, StateSampler};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn roundtrip(ds: Dataset) -> Dataset {
        let mut meta = Metadata::new();
        meta.insert("seed".into(), "7".into());
        let mut buf = Vec::new();
        write_dataset(&ds, &meta, &mut buf).unwrap();
        let (back, meta_back) = read_dataset(buf.as_slice()).unwrap();
        assert_eq!(meta_back.get("seed").map(String::as_str), Some("7"));
        back
    }

    fn strip_ids(ds: &mut Dataset) {
        match ds {
            Dataset::TotalSpin(t) => t.blocks.iter_mut().flatten().for_each(|b| b.id = 0),
            Dataset::Pairs(p) => p.blocks.iter_mut().flatten().for_each(|b| b.id = 0),
        }
    }

    #[test]
    fn roundtrips_every_pattern() {
        let sampler = StateSampler::new(&StateModel::dicke(4, 1).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let all = [
            Dataset::TotalSpin(collect_total_spin(&sampler, 5, &mut rng)),
            Dataset::Pairs(collect_all_pairs(&sampler, 3, &mut rng).unwrap()),
            Dataset::Pairs(collect_split_single(&sampler, 4, &[Direction::Y], &mut rng).unwrap()),
            Dataset::Pairs(collect_random_pairs(&sampler, 6, 2, &mut rng).unwrap()),
            Dataset::Pairs(collect_random_split(&sampler, 6, 2, &Direction::ALL, &mut rng).unwrap()),
        ];
        for mut ds in all {
            let mut back = roundtrip(ds.clone());
            strip_ids(&mut ds);
            strip_ids(&mut back);
            assert_eq!(ds, back);
        }
    }

    #[test]
    fn total_spin_row_count() {
        let sampler = StateSampler::new(&StateModel::dicke(10, 5).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ds = Dataset::TotalSpin(collect_total_spin(&sampler, 7400, &mut rng));
        let mut buf = Vec::new();
        write_dataset(&ds, &Metadata::new(), &mut buf).unwrap();
        let lines = String::from_utf8(buf).unwrap().lines().count();
        assert_eq!(lines, 22200 + 2);
    }

    #[test]
    fn rejects_bad_input() {
        let bad_outcome = "# spinsq-dataset v1 pattern=all-pairs n=2 k=1\ndirection,i,j,rep,si2,sj2\nx,0,1,0,1,3\n";
        assert!(read_dataset(bad_outcome.as_bytes()).is_err());
        let no_header = "direction,rep,outcome2m\nx,0,2\n";
        assert!(read_dataset(no_header.as_bytes()).is_err());
        let odd = "# spinsq-dataset v1 pattern=total-spin n=2\ndirection,rep,outcome2m\nx,0,1\n";
        assert!(read_dataset(odd.as_bytes()).is_err());
        let incomplete = "# spinsq-dataset v1 pattern=all-pairs n=2 k=1\ndirection,i,j,rep,si2,sj2\nx,0,1,0,1,1\n";
        assert!(matches!(
            read_dataset(incomplete.as_bytes()),
            Err(Error::DatasetMismatch(_))
        ));
    }
}
