use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ErrorKind, PerturbationPair, SuitabilityResult};
use crate::corpus::Caption;
use crate::error::{Error, Result};
use crate::report::{write_atomic, write_text_atomic, BarChart};

#[derive(Serialize, Deserialize)]
struct PairRow {
    id: String,
    kind: String,
    original: String,
    type1: String,
    type2: String,
    meta_json: String,
}

pub fn write_pairs<W: Write>(pairs: &[PerturbationPair], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in pairs {
        w.serialize(PairRow {
            id: p.id.clone(),
            kind: p.kind.to_string(),
            original: p.original.text().to_owned(),
            type1: p.type1.text().to_owned(),
            type2: p.type2.text().to_owned(),
            meta_json: serde_json::to_string(&p.meta)?,
        })?;
    }
    w.flush().map_err(|e| Error::Data(format!("writing pairs: {e}")))?;
    Ok(())
}

pub fn read_pairs<R: Read>(input: R) -> Result<Vec<PerturbationPair>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<PairRow>().enumerate() {
        let row = row?;
        let pair = (|| {
            let meta: BTreeMap<String, Value> =
                serde_json::from_str(&row.meta_json).map_err(|e| Error::Data(format!("meta_json: {e}")))?;
            Ok(PerturbationPair {
                kind: row
                    .kind
                    .parse()
                    .map_err(|_| Error::Data(format!("unknown kind {:?}", row.kind)))?,
                original: Caption::new(row.original)?,
                type1: Caption::new(row.type1)?,
                type2: Caption::new(row.type2)?,
                id: row.id,
                meta,
            })
        })()
        .map_err(|e: Error| Error::at(i, e))?;
        out.push(pair);
    }
    Ok(out)
}

pub fn write_report_csv<W: Write>(results: &[SuitabilityResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["metric", "kind", "n_pairs", "n_ties", "pct_type1_higher"])?;
    for r in results {
        w.write_record([
            r.metric.name().to_owned(),
            r.kind.to_string(),
            r.n_pairs.to_string(),
            r.n_ties.to_string(),
            r.pct_type1_higher.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Data(format!("writing report: {e}")))?;
    Ok(())
}

/// Report CSV plus, optionally, a grouped bar chart with one group per
/// metric and one bar per error kind.
pub fn emit_report(results: &[SuitabilityResult], csv_path: &Path, svg_path: Option<&Path>) -> Result<()> {
    if results.is_empty() {
        return Err(Error::invalid("results", "nothing to report"));
    }
    let svg = svg_path.map(|_| suitability_chart(results).to_svg()).transpose()?;
    write_atomic(csv_path, |w| write_report_csv(results, w))?;
    if let (Some(path), Some(svg)) = (svg_path, svg) {
        write_text_atomic(path, &svg)?;
    }
    Ok(())
}

fn suitability_chart(results: &[SuitabilityResult]) -> BarChart {
    let kinds: Vec<ErrorKind> = ErrorKind::ALL
        .into_iter()
        .filter(|k| results.iter().any(|r| r.kind == *k))
        .collect();
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for r in results {
        let name = r.metric.name();
        if !groups.iter().any(|(g, _)| g == name) {
            groups.push((name.to_owned(), vec![0.0; kinds.len()]));
        }
        let g = groups.iter_mut().find(|(g, _)| g == name).expect("inserted above");
        let k = kinds.iter().position(|k| *k == r.kind).expect("collected above");
        g.1[k] = r.pct_type1_higher;
    }
    BarChart {
        title: "type-1 scored above type-2".into(),
        y_label: "% of pairs".into(),
        y_max: 100.0,
        series: kinds.iter().map(|k| k.to_string()).collect(),
        groups,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Metric;

    fn results() -> Vec<SuitabilityResult> {
        let mut v = Vec::new();
        for m in [Metric::Bleu4, Metric::RougeL] {
            for (i, k) in ErrorKind::ALL.into_iter().enumerate() {
                v.push(SuitabilityResult {
                    metric: m,
                    kind: k,
                    n_pairs: 3,
                    n_ties: i,
                    pct_type1_higher: 100.0 / 3.0 * i as f64,
                });
            }
        }
        v
    }

    #[test]
    fn pairs_round_trip() {
        let p = PerturbationPair {
            id: "clip,1#0".into(),
            kind: ErrorKind::Spatial,
            original: Caption::new("a man talks and music plays in the background").unwrap(),
            type1: Caption::new("a man talks and music plays").unwrap(),
            type2: Caption::new("music plays and a man talks in the background").unwrap(),
            meta: BTreeMap::from([("keyword".to_owned(), Value::from("in the background"))]),
        };
        let mut buf = Vec::new();
        write_pairs(std::slice::from_ref(&p), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("id,kind,original,type1,type2,meta_json\n"));
        assert_eq!(read_pairs(buf.as_slice()).unwrap(), vec![p]);
    }

    #[test]
    fn bad_pair_rows() {
        let bad_kind = "id,kind,original,type1,type2,meta_json\na,color,x,y,z,{}\n";
        assert!(matches!(
            read_pairs(bad_kind.as_bytes()),
            Err(Error::AtItem { index: 0, .. })
        ));
        let bad_meta = "id,kind,original,type1,type2,meta_json\na,spatial,x,y,z,nope\n";
        assert!(read_pairs(bad_meta.as_bytes()).is_err());
    }

    #[test]
    fn report_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("r.csv");
        let svg_path = dir.path().join("r.svg");
        let res = results();
        emit_report(&res, &csv_path, Some(&svg_path)).unwrap();
        let mut r = csv::Reader::from_path(&csv_path).unwrap();
        let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
        assert_eq!(rows.len(), 6);
        for (row, want) in rows.iter().zip(&res) {
            assert_eq!(row[0].parse::<Metric>().unwrap(), want.metric);
            assert_eq!(row[1].parse::<ErrorKind>().unwrap(), want.kind);
            assert_eq!(row[2].parse::<usize>().unwrap(), want.n_pairs);
            assert_eq!(row[3].parse::<usize>().unwrap(), want.n_ties);
            assert_eq!(row[4].parse::<f64>().unwrap(), want.pct_type1_higher);
        }
        let svg = std::fs::read_to_string(&svg_path).unwrap();
        assert!(svg.contains("rougel") && svg.contains("spatial"));
        assert!(emit_report(&[], &csv_path, None).is_err());
    }
}
