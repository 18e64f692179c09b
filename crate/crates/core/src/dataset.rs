//! Labeled-corpus support: sample-size arithmetic, stratified sampling,
//! inter-rater agreement and labeled CSV I/O.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{check_header, FeatureRow, FeatureVector, FEATURE_HEADER};
use crate::seed::derived_rng;
use crate::smell::SmellKind;

/// Presence of each smell, indexed by [`SmellKind::index`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels(pub [bool; 4]);

impl Labels {
    pub fn get(&self, smell: SmellKind) -> bool {
        self.0[smell.index()]
    }

    pub fn set(&mut self, smell: SmellKind, value: bool) {
        self.0[smell.index()] = value;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledInstance {
    pub id: String,
    pub project: String,
    pub class: String,
    pub method: String,
    pub features: FeatureVector,
    pub labels: Labels,
}

/// Labeled instances grouped by project (sorted by project name).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub projects: BTreeMap<String, Vec<LabeledInstance>>,
}

impl Corpus {
    pub fn from_instances(instances: impl IntoIterator<Item = LabeledInstance>) -> Result<Self> {
        let mut projects: BTreeMap<String, Vec<LabeledInstance>> = BTreeMap::new();
        for inst in instances {
            projects.entry(inst.project.clone()).or_default().push(inst);
        }
        let corpus = Corpus { projects };
        corpus.validate()?;
        Ok(corpus)
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        for (project, rows) in &self.projects {
            if project.is_empty() {
                return Err(Error::Schema("empty project name".into()));
            }
            for r in rows {
                if !ids.insert(r.id.as_str()) {
                    return Err(Error::Schema(format!("duplicate id `{}`", r.id)));
                }
                if !r.features.is_finite() {
                    return Err(Error::Schema(format!("non-finite feature in `{}`", r.id)));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.projects.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn instances(&self) -> impl Iterator<Item = &LabeledInstance> {
        self.projects.values().flatten()
    }
}

pub const LABEL_COLUMNS: [&str; 4] = [
    "label_eager",
    "label_mystery",
    "label_resource_optimism",
    "label_redundancy",
];

fn labeled_header() -> Vec<&'static str> {
    FEATURE_HEADER.iter().chain(LABEL_COLUMNS.iter()).copied().collect()
}

fn parse_flag(value: &str, column: &str, line: usize) -> Result<bool> {
    match value {
        "1" => Ok(true),
        "0" => Ok(false),
        other => Err(Error::MalformedRow {
            line,
            message: format!("column `{column}` must be 0 or 1, got `{other}`"),
        }),
    }
}

pub fn read_corpus<R: Read>(input: R) -> Result<Corpus> {
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let header = labeled_header();
    check_header(r.headers()?, &header)?;
    let mut instances = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::MalformedRow {
            line,
            message: e.to_string(),
        })?;
        if rec.len() != header.len() {
            return Err(Error::Schema(format!(
                "line {line}: expected {} columns, found {}",
                header.len(),
                rec.len()
            )));
        }
        let row = FeatureRow::from_record(&rec, line)?;
        let mut labels = Labels::default();
        for (k, smell) in SmellKind::ALL.into_iter().enumerate() {
            let col = FEATURE_HEADER.len() + k;
            labels.set(smell, parse_flag(&rec[col], LABEL_COLUMNS[k], line)?);
        }
        instances.push(LabeledInstance {
            id: row.id,
            project: row.project,
            class: row.class,
            method: row.method,
            features: row.features,
            labels,
        });
    }
    Corpus::from_instances(instances)
}

pub fn write_corpus<W: Write>(corpus: &Corpus, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(labeled_header())?;
    for inst in corpus.instances() {
        let mut fields = FeatureRow {
            id: inst.id.clone(),
            project: inst.project.clone(),
            class: inst.class.clone(),
            method: inst.method.clone(),
            features: inst.features,
        }
        .fields();
        fields.extend(inst.labels.0.iter().map(|&b| if b { "1" } else { "0" }.to_string()));
        w.write_record(fields)?;
    }
    w.flush().map_err(|e| Error::io("<labeled csv>", e))?;
    Ok(())
}

pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(std::io::BufReader::new(f))
}

pub fn save_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_corpus(corpus, std::io::BufWriter::new(f))
}

/// Seeded synthetic corpus for smoke tests and benchmarks. Every smell
/// label equals the instance class. With `separable`, the two classes draw
/// every feature from disjoint ranges; otherwise both classes share one
/// distribution.
pub fn synthetic_corpus(
    projects: usize,
    per_project: usize,
    positive_rate: f64,
    separable: bool,
    seed: u64,
) -> Corpus {
    use rand::Rng as _;
    let mut instances = Vec::with_capacity(projects * per_project);
    for p in 0..projects {
        let project = format!("synth{p}");
        let mut rng = derived_rng(seed, &["synthetic", &project]);
        let positives = (per_project as f64 * positive_rate).round() as usize;
        let mut classes: Vec<bool> = (0..per_project).map(|i| i < positives).collect();
        rand::seq::SliceRandom::shuffle(classes.as_mut_slice(), &mut rng);
        for (i, &smelly) in classes.iter().enumerate() {
            let high = smelly && separable;
            let mut count = |lo: usize, hi: usize| {
                if high {
                    rng.gen_range(hi + 2..=hi + 6)
                } else {
                    rng.gen_range(lo..=hi)
                }
            };
            let (nmc, ptmi, nrf, nrdb, ernc, frnc) =
                (count(0, 4), count(0, 3), count(0, 1), count(0, 1), count(0, 1), count(0, 1));
            let mut ratio = || if high { rng.gen_range(0.6..1.0) } else { rng.gen_range(0.0..0.4) };
            let features = FeatureVector {
                nmc,
                ptmi,
                pet: ratio(),
                nrf,
                nrdb,
                ernc,
                frnc,
                pr: ratio(),
                sr: ratio(),
            };
            instances.push(LabeledInstance {
                id: format!("{project}/t{i}"),
                project: project.clone(),
                class: format!("{project}.Synthetic{}Test", i / 10),
                method: format!("test{i}"),
                features,
                labels: Labels([smelly; 4]),
            });
        }
    }
    Corpus::from_instances(instances).expect("synthetic ids are unique")
}

/// Inverse of the standard normal CDF (Acklam's rational approximation,
/// relative error below 1.2e-9).
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}

/// Sample size for estimating a proportion (worst case p = 0.5) at the
/// given two-sided confidence and margin, with finite-population correction.
pub fn required_sample_size(population: usize, confidence: f64, margin: f64) -> Result<usize> {
    if population == 0 {
        return Err(Error::InvalidArgument("population must be at least 1".into()));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence {confidence} outside (0, 1)"
        )));
    }
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::InvalidArgument(format!("margin {margin} outside (0, 1)")));
    }
    let z = normal_quantile(1.0 - (1.0 - confidence) / 2.0);
    let n0 = z * z * 0.25 / (margin * margin);
    let n = n0 / (1.0 + n0 / population as f64);
    Ok((n.ceil() as usize).min(population))
}

/// Largest-remainder apportionment of `n` across strata of the given sizes.
/// Ties in the remainder go to the earlier stratum.
pub fn proportional_quotas(sizes: &[usize], n: usize) -> Result<Vec<usize>> {
    let total: usize = sizes.iter().sum();
    if n > total {
        return Err(Error::SampleTooLarge {
            requested: n,
            available: total,
        });
    }
    if total == 0 {
        return Ok(vec![0; sizes.len()]);
    }
    let (n128, t128) = (n as u128, total as u128);
    let mut quotas: Vec<usize> = sizes
        .iter()
        .map(|&s| (n128 * s as u128 / t128) as usize)
        .collect();
    let assigned: usize = quotas.iter().sum();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = n128 * sizes[a] as u128 % t128;
        let rb = n128 * sizes[b] as u128 % t128;
        rb.cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(n - assigned) {
        quotas[i] += 1;
    }
    Ok(quotas)
}

/// Proportional stratified sample without replacement. Within each stratum
/// the selection is uniform and depends only on `seed` and the stratum name;
/// selected items keep their original order.
pub fn stratified_sample<T: Clone>(
    strata: &BTreeMap<String, Vec<T>>,
    n: usize,
    seed: u64,
) -> Result<BTreeMap<String, Vec<T>>> {
    let sizes: Vec<usize> = strata.values().map(Vec::len).collect();
    let quotas = proportional_quotas(&sizes, n)?;
    let mut out = BTreeMap::new();
    for ((name, items), quota) in strata.iter().zip(quotas) {
        let mut rng = derived_rng(seed, &["stratified-sample", name]);
        let mut picked = sample(&mut rng, items.len(), quota).into_vec();
        picked.sort_unstable();
        out.insert(name.clone(), picked.into_iter().map(|i| items[i].clone()).collect());
    }
    Ok(out)
}

impl Corpus {
    pub fn stratified_sample(&self, n: usize, seed: u64) -> Result<Corpus> {
        Ok(Corpus {
            projects: stratified_sample(&self.projects, n, seed)?,
        })
    }
}

/// Cohen's kappa for two binary raters.
pub fn cohen_kappa(a: &[bool], b: &[bool]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("kappa needs at least one item".into()));
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let pa = a.iter().filter(|&&x| x).count() as f64 / n;
    let pb = b.iter().filter(|&&x| x).count() as f64 / n;
    let po = agree / n;
    let pe = pa * pb + (1.0 - pa) * (1.0 - pb);
    if (1.0 - pe).abs() < f64::EPSILON {
        // Both raters constant: full agreement iff they agree everywhere.
        return Ok(if po == 1.0 { 1.0 } else { 0.0 });
    }
    Ok((po - pe) / (1.0 - pe))
}

/// Labels assigned by one rater: an `id` column plus any subset of the
/// label columns; other columns are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct RaterLabels {
    pub smells: Vec<SmellKind>,
    pub rows: BTreeMap<String, Vec<bool>>,
}

pub fn read_rater_labels<R: Read>(input: R) -> Result<RaterLabels> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let id_col = header
        .iter()
        .position(|c| c == "id")
        .ok_or_else(|| Error::Schema("missing column `id`".into()))?;
    let mut cols = Vec::new();
    for smell in SmellKind::ALL {
        if let Some(p) = header.iter().position(|c| c == smell.label_column()) {
            cols.push((smell, p));
        }
    }
    if cols.is_empty() {
        return Err(Error::Schema("no label columns".into()));
    }
    let mut rows = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::MalformedRow {
            line,
            message: e.to_string(),
        })?;
        let labels = cols
            .iter()
            .map(|(s, p)| parse_flag(rec.get(*p).unwrap_or_default(), s.label_column(), line))
            .collect::<Result<Vec<_>>>()?;
        let id = rec.get(id_col).unwrap_or_default().to_string();
        if rows.insert(id.clone(), labels).is_some() {
            return Err(Error::Schema(format!("duplicate id `{id}`")));
        }
    }
    Ok(RaterLabels {
        smells: cols.into_iter().map(|(s, _)| s).collect(),
        rows,
    })
}

/// Kappa per smell column present in both files, items matched by id.
pub fn kappa_by_smell(a: &RaterLabels, b: &RaterLabels) -> Result<Vec<(SmellKind, f64)>> {
    let ids_a: BTreeSet<_> = a.rows.keys().collect();
    let ids_b: BTreeSet<_> = b.rows.keys().collect();
    if ids_a != ids_b {
        let diff = ids_a.symmetric_difference(&ids_b).next().expect("sets differ");
        return Err(Error::Schema(format!("id `{diff}` is labeled by only one rater")));
    }
    let mut out = Vec::new();
    for (ia, smell) in a.smells.iter().enumerate() {
        let Some(ib) = b.smells.iter().position(|s| s == smell) else {
            continue;
        };
        let xa: Vec<bool> = a.rows.values().map(|r| r[ia]).collect();
        let xb: Vec<bool> = b.rows.values().map(|r| r[ib]).collect();
        out.push((*smell, cohen_kappa(&xa, &xb)?));
    }
    if out.is_empty() {
        return Err(Error::Schema("the raters share no label column".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sample_size_examples() {
        let n = required_sample_size(51_549, 0.99, 0.01).unwrap();
        assert!((12_548..=12_552).contains(&n), "{n}");
        assert_eq!(required_sample_size(1_000_000_000, 0.95, 0.05).unwrap(), 385);
        let small = required_sample_size(100, 0.99, 0.01).unwrap();
        assert!((99..=100).contains(&small));
    }

    #[test]
    fn sample_size_rejects_bad_input() {
        assert!(required_sample_size(0, 0.9, 0.1).is_err());
        assert!(required_sample_size(10, 1.0, 0.1).is_err());
        assert!(required_sample_size(10, 0.9, 0.0).is_err());
    }

    #[test]
    fn quantile_matches_known_values() {
        assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-6);
        assert!((normal_quantile(0.995) - 2.575_829_303_548_901).abs() < 1e-6);
        assert!((normal_quantile(0.001) + 3.090_232_306_167_813_5).abs() < 1e-6);
        assert_eq!(normal_quantile(0.5), 0.0);
    }

    #[test]
    fn quotas_examples() {
        assert_eq!(proportional_quotas(&[50, 50], 10).unwrap(), vec![5, 5]);
        assert_eq!(proportional_quotas(&[90, 10], 10).unwrap(), vec![9, 1]);
        assert_eq!(proportional_quotas(&[1, 1, 1], 2).unwrap(), vec![1, 1, 0]);
        assert!(proportional_quotas(&[3], 4).is_err());
    }

    #[test]
    fn stratified_sample_is_deterministic_and_proportional() {
        let mut strata = BTreeMap::new();
        strata.insert("a".to_string(), (0..90).collect::<Vec<u32>>());
        strata.insert("b".to_string(), (0..10).collect::<Vec<u32>>());
        let s1 = stratified_sample(&strata, 10, 7).unwrap();
        let s2 = stratified_sample(&strata, 10, 7).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1["a"].len(), 9);
        assert_eq!(s1["b"].len(), 1);
        let s3 = stratified_sample(&strata, 10, 8).unwrap();
        assert_ne!(s1, s3);
        assert!(stratified_sample(&strata, 101, 7).is_err());
    }

    #[test]
    fn kappa_examples() {
        let a = [true, false, true, true, false];
        assert_eq!(cohen_kappa(&a, &a).unwrap(), 1.0);
        assert!(cohen_kappa(&a, &a[..4]).is_err());
        // both-yes 20, a-yes/b-no 5, a-no/b-yes 10, both-no 15.
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (n, va, vb) in [(20, true, true), (5, true, false), (10, false, true), (15, false, false)] {
            for _ in 0..n {
                x.push(va);
                y.push(vb);
            }
        }
        // p_o = 35/50, p_e = (25/50)(30/50) + (25/50)(20/50) = 0.5.
        let expected = (0.7 - 0.5) / (1.0 - 0.5);
        assert!((cohen_kappa(&x, &y).unwrap() - expected).abs() < 1e-12);
        assert_eq!(cohen_kappa(&[true, true], &[true, true]).unwrap(), 1.0);
    }

    #[test]
    fn kappa_near_zero_for_independent_raters() {
        // b repeats a's marginal but is arranged independently of it.
        let a: Vec<bool> = (0..400).map(|i| i % 2 == 0).collect();
        let b: Vec<bool> = (0..400).map(|i| (i / 2) % 2 == 0).collect();
        assert!(cohen_kappa(&a, &b).unwrap().abs() < 1e-12);
    }

    fn instance(id: &str, project: &str) -> LabeledInstance {
        LabeledInstance {
            id: id.into(),
            project: project.into(),
            class: "C".into(),
            method: "m".into(),
            features: FeatureVector {
                nmc: 2,
                pet: 0.25,
                ..FeatureVector::default()
            },
            labels: Labels([true, false, false, true]),
        }
    }

    #[test]
    fn corpus_round_trips() {
        let empty = Corpus::default();
        let mut buf = Vec::new();
        write_corpus(&empty, &mut buf).unwrap();
        assert_eq!(read_corpus(buf.as_slice()).unwrap(), empty);

        let c = Corpus::from_instances([instance("b/1", "b"), instance("a/1", "a"), instance("a/2", "a")])
            .unwrap();
        let mut buf = Vec::new();
        write_corpus(&c, &mut buf).unwrap();
        assert_eq!(read_corpus(buf.as_slice()).unwrap(), c);
    }

    #[test]
    fn corpus_schema_errors() {
        let header = labeled_header().join(",");
        let missing_label = format!("{header}\nx,p,C,m,1,0,0,0,0,0,0,0,0,1,0,0\n");
        assert!(matches!(read_corpus(missing_label.as_bytes()), Err(Error::Schema(_))));
        let unknown = format!("{header},label_sensitive_equality\n");
        assert!(matches!(read_corpus(unknown.as_bytes()), Err(Error::Schema(_))));
        let bad_flag = format!("{header}\nx,p,C,m,1,0,0,0,0,0,0,0,0,1,0,0,2\n");
        assert!(matches!(
            read_corpus(bad_flag.as_bytes()),
            Err(Error::MalformedRow { line: 2, .. })
        ));
        let dup = format!("{header}\nx,p,C,m,1,0,0,0,0,0,0,0,0,1,0,0,0\nx,p,C,m,1,0,0,0,0,0,0,0,0,1,0,0,0\n");
        assert!(matches!(read_corpus(dup.as_bytes()), Err(Error::Schema(_))));
    }

    #[test]
    fn rater_files_match_by_id() {
        let a = read_rater_labels("id,label_eager\nx,1\ny,0\nz,1\n".as_bytes()).unwrap();
        let b = read_rater_labels("label_eager,id\n1,z\n0,y\n1,x\n".as_bytes()).unwrap();
        let k = kappa_by_smell(&a, &b).unwrap();
        assert_eq!(k, vec![(SmellKind::EagerTest, 1.0)]);
        let c = read_rater_labels("id,label_eager\nx,1\n".as_bytes()).unwrap();
        assert!(kappa_by_smell(&a, &c).is_err());
    }

    proptest! {
        #[test]
        fn sample_size_monotone(pop in 1usize..100_000, c in 0.5f64..0.999, m in 0.005f64..0.2, dc in 0.0f64..0.3, dm in 0.0f64..0.1, dp in 0usize..1000) {
            let base = required_sample_size(pop, c, m).unwrap();
            let c2 = (c + dc).min(0.9999);
            prop_assert!(required_sample_size(pop, c2, m).unwrap() >= base);
            prop_assert!(required_sample_size(pop, c, (m + dm).min(0.99)).unwrap() <= base);
            prop_assert!(required_sample_size(pop + dp, c, m).unwrap() >= base);
        }

        #[test]
        fn quotas_sum_and_stay_close(sizes in prop::collection::vec(0usize..200, 1..8), frac in 0.0f64..1.0) {
            let total: usize = sizes.iter().sum();
            let n = (total as f64 * frac) as usize;
            let q = proportional_quotas(&sizes, n).unwrap();
            prop_assert_eq!(q.iter().sum::<usize>(), n);
            if total > 0 {
                for (s, qi) in sizes.iter().zip(&q) {
                    let exact = n as f64 * *s as f64 / total as f64;
                    prop_assert!((*qi as f64 - exact).abs() < 1.0);
                    prop_assert!(qi <= s);
                }
            }
        }

        #[test]
        fn kappa_symmetric_and_self_one(a in prop::collection::vec(any::<bool>(), 2..40), b in prop::collection::vec(any::<bool>(), 40)) {
            let b = &b[..a.len()];
            let k1 = cohen_kappa(&a, b).unwrap();
            let k2 = cohen_kappa(b, &a).unwrap();
            prop_assert!((k1 - k2).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&k1));
            if a.iter().any(|&x| x) && a.iter().any(|&x| !x) {
                prop_assert_eq!(cohen_kappa(&a, &a).unwrap(), 1.0);
            }
        }
    }
}
