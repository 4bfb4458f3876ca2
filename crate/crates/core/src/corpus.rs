//! Review records and corpus ingestion.
//!
//! Both input formats carry the same columns: `review_id`, `product_id`,
//! `star_rating`, `helpful_votes`, `total_votes`, `text` and an optional
//! `version_group`. Loading stops at the first bad record and reports its
//! line number.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::text::normalize_text;

/// Minimum number of helpfulness votes a review needs to enter the analyses.
pub const DEFAULT_MIN_VOTES: u64 = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub review_id: String,
    pub product_id: String,
    pub star_rating: u8,
    pub helpful_votes: u64,
    pub total_votes: u64,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version_group: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub label: String,
    pub reviews: Vec<Review>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            other => Err(Error::InvalidArgument(format!("unknown format `{other}` (expected jsonl or csv)"))),
        }
    }
}

const COLUMNS: [&str; 7] =
    ["review_id", "product_id", "star_rating", "helpful_votes", "total_votes", "text", "version_group"];

impl Corpus {
    pub fn new(label: impl Into<String>, reviews: Vec<Review>) -> Self {
        Corpus { label: label.into(), reviews }
    }

    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    fn with_reviews(&self, reviews: Vec<Review>) -> Corpus {
        Corpus { label: self.label.clone(), reviews }
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.reviews {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(COLUMNS)?;
        for r in &self.reviews {
            let stars = r.star_rating.to_string();
            let helpful = r.helpful_votes.to_string();
            let total = r.total_votes.to_string();
            w.write_record([
                r.review_id.as_str(),
                r.product_id.as_str(),
                &stars,
                &helpful,
                &total,
                r.text.as_str(),
                r.version_group.as_deref().unwrap_or(""),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write<W: Write>(&self, out: W, format: Format) -> Result<()> {
        match format {
            Format::Jsonl => self.write_jsonl(out),
            Format::Csv => self.write_csv(out),
        }
    }
}

/// Reads a corpus in the given format, validating every record.
pub fn load_reviews<R: Read>(source: R, format: Format, label: &str) -> Result<Corpus> {
    let mut validator = Validator::default();
    match format {
        Format::Jsonl => {
            let reader = std::io::BufReader::new(source);
            for (idx, line) in reader.lines().enumerate() {
                let line_no = idx + 1;
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let value: Value = serde_json::from_str(&line)
                    .map_err(|e| Error::Record { line: line_no, message: format!("malformed JSON: {e}") })?;
                let Value::Object(obj) = value else {
                    return Err(Error::Record { line: line_no, message: "expected a JSON object".into() });
                };
                validator.push(review_from_json(&obj, line_no)?, line_no)?;
            }
        }
        Format::Csv => {
            let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
            let headers = reader.headers()?.clone();
            let col = |name: &str| headers.iter().position(|h| h.trim() == name);
            let mut idx = [None; 7];
            for (slot, name) in idx.iter_mut().zip(COLUMNS) {
                *slot = col(name);
                if slot.is_none() && name != "version_group" {
                    return Err(Error::Field {
                        line: 1,
                        field: name.into(),
                        message: "missing column in header".into(),
                    });
                }
            }
            for rec in reader.records() {
                let rec = rec?;
                let line_no = rec.position().map_or(0, |p| p.line() as usize);
                let get = |i: usize| idx[i].and_then(|c| rec.get(c));
                let raw = RawFields {
                    review_id: get(0),
                    product_id: get(1),
                    star_rating: get(2),
                    helpful_votes: get(3),
                    total_votes: get(4),
                    text: get(5),
                    version_group: get(6).filter(|s| !s.is_empty()),
                };
                validator.push(raw.into_review(line_no)?, line_no)?;
            }
        }
    }
    Ok(Corpus::new(label, validator.reviews))
}

#[derive(Default)]
struct Validator {
    seen: HashSet<String>,
    reviews: Vec<Review>,
}

impl Validator {
    fn push(&mut self, review: Review, line: usize) -> Result<()> {
        if review.helpful_votes > review.total_votes {
            return Err(Error::Record {
                line,
                message: format!(
                    "helpful_votes ({}) exceeds total_votes ({}); requires helpful_votes <= total_votes",
                    review.helpful_votes, review.total_votes
                ),
            });
        }
        if !(1..=5).contains(&review.star_rating) {
            return Err(Error::Field {
                line,
                field: "star_rating".into(),
                message: format!("{} is outside [1, 5]", review.star_rating),
            });
        }
        if !self.seen.insert(review.review_id.clone()) {
            return Err(Error::DuplicateId { line, id: review.review_id });
        }
        self.reviews.push(review);
        Ok(())
    }
}

struct RawFields<'a> {
    review_id: Option<&'a str>,
    product_id: Option<&'a str>,
    star_rating: Option<&'a str>,
    helpful_votes: Option<&'a str>,
    total_votes: Option<&'a str>,
    text: Option<&'a str>,
    version_group: Option<&'a str>,
}

fn field_err(line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Field { line, field: field.into(), message: message.into() }
}

fn parse_int(line: usize, field: &str, raw: Option<&str>) -> Result<u64> {
    let raw = raw.ok_or_else(|| field_err(line, field, "missing"))?;
    raw.trim().parse::<u64>().map_err(|_| field_err(line, field, format!("`{raw}` is not a non-negative integer")))
}

fn parse_stars(line: usize, raw: Option<&str>) -> Result<u8> {
    let stars = parse_int(line, "star_rating", raw)?;
    if !(1..=5).contains(&stars) {
        return Err(field_err(line, "star_rating", format!("{stars} is outside [1, 5]")));
    }
    Ok(stars as u8)
}

impl RawFields<'_> {
    fn into_review(self, line: usize) -> Result<Review> {
        let required = |v: Option<&str>, field: &str| -> Result<String> {
            v.map(str::to_string).ok_or_else(|| field_err(line, field, "missing"))
        };
        Ok(Review {
            review_id: required(self.review_id, "review_id")?,
            product_id: required(self.product_id, "product_id")?,
            star_rating: parse_stars(line, self.star_rating)?,
            helpful_votes: parse_int(line, "helpful_votes", self.helpful_votes)?,
            total_votes: parse_int(line, "total_votes", self.total_votes)?,
            text: required(self.text, "text")?,
            version_group: self.version_group.map(str::to_string),
        })
    }
}

fn review_from_json(obj: &Map<String, Value>, line: usize) -> Result<Review> {
    let string = |field: &str| -> Result<String> {
        match obj.get(field) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(other) => Err(field_err(line, field, format!("expected a string, found {other}"))),
            None => Err(field_err(line, field, "missing")),
        }
    };
    let int = |field: &str| -> Result<u64> {
        match obj.get(field) {
            Some(Value::Number(n)) => {
                n.as_u64().ok_or_else(|| field_err(line, field, format!("{n} is not a non-negative integer")))
            }
            Some(other) => Err(field_err(line, field, format!("expected an integer, found {other}"))),
            None => Err(field_err(line, field, "missing")),
        }
    };
    let stars = int("star_rating")?;
    if !(1..=5).contains(&stars) {
        return Err(field_err(line, "star_rating", format!("{stars} is outside [1, 5]")));
    }
    let version_group = match obj.get("version_group") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(other) => return Err(field_err(line, "version_group", format!("expected a string, found {other}"))),
    };
    Ok(Review {
        review_id: string("review_id")?,
        product_id: string("product_id")?,
        star_rating: stars as u8,
        helpful_votes: int("helpful_votes")?,
        total_votes: int("total_votes")?,
        text: string("text")?,
        version_group,
    })
}

/// Keeps the reviews with at least `min_votes` helpfulness votes.
pub fn filter_min_votes(corpus: &Corpus, min_votes: u64) -> Corpus {
    corpus.with_reviews(corpus.reviews.iter().filter(|r| r.total_votes >= min_votes).cloned().collect())
}

/// Collapses mechanical cross-posts.
///
/// Reviews sharing a `version_group`, a normalised text and a star rating are
/// copies of one review shown on several editions; the copy with the most
/// votes survives (ties: smallest `review_id`). Reviews without a
/// `version_group` are left alone. Survivors keep their input order.
pub fn dedup_mechanical(corpus: &Corpus) -> Corpus {
    let mut best: HashMap<(&str, String, u8), usize> = HashMap::new();
    for (i, r) in corpus.reviews.iter().enumerate() {
        let Some(group) = r.version_group.as_deref() else { continue };
        let key = (group, normalize_text(&r.text), r.star_rating);
        best.entry(key)
            .and_modify(|cur| {
                let c = &corpus.reviews[*cur];
                if (r.total_votes, std::cmp::Reverse(&r.review_id)) > (c.total_votes, std::cmp::Reverse(&c.review_id)) {
                    *cur = i;
                }
            })
            .or_insert(i);
    }
    let keep: HashSet<usize> = best.into_values().collect();
    corpus.with_reviews(
        corpus
            .reviews
            .iter()
            .enumerate()
            .filter(|(i, r)| r.version_group.is_none() || keep.contains(i))
            .map(|(_, r)| r.clone())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn review(id: &str, product: &str, stars: u8, helpful: u64, total: u64) -> Review {
        Review {
            review_id: id.into(),
            product_id: product.into(),
            star_rating: stars,
            helpful_votes: helpful,
            total_votes: total,
            text: String::new(),
            version_group: None,
        }
    }

    #[test]
    fn loads_single_jsonl_record() {
        let src =
            r#"{"review_id":"r1","product_id":"p1","star_rating":5,"helpful_votes":26,"total_votes":32,"text":"..."}"#;
        let c = load_reviews(src.as_bytes(), Format::Jsonl, "us").unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.reviews[0].helpful_votes, 26);
        assert_eq!(c.reviews[0].total_votes, 32);
        assert_eq!(c.label, "us");
    }

    #[test]
    fn empty_source_is_empty_corpus() {
        assert!(load_reviews(&b""[..], Format::Jsonl, "x").unwrap().is_empty());
        assert!(load_reviews(
            &b"review_id,product_id,star_rating,helpful_votes,total_votes,text\n"[..],
            Format::Csv,
            "x"
        )
        .unwrap()
        .is_empty());
    }

    #[test]
    fn rejects_more_helpful_than_total() {
        let src = "\n".repeat(6)
            + r#"{"review_id":"r1","product_id":"p1","star_rating":5,"helpful_votes":33,"total_votes":32,"text":""}"#;
        let err = load_reviews(src.as_bytes(), Format::Jsonl, "x").unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("line 7:"), "{msg}");
        assert!(msg.contains("helpful_votes <= total_votes"), "{msg}");
    }

    #[test]
    fn rejects_bad_fields() {
        let cases = [
            (
                r#"{"review_id":"r1","product_id":"p1","star_rating":6,"helpful_votes":1,"total_votes":2,"text":""}"#,
                "star_rating",
            ),
            (
                r#"{"review_id":"r1","product_id":"p1","star_rating":4.5,"helpful_votes":1,"total_votes":2,"text":""}"#,
                "star_rating",
            ),
            (
                r#"{"review_id":"r1","product_id":"p1","star_rating":4,"helpful_votes":-1,"total_votes":2,"text":""}"#,
                "helpful_votes",
            ),
            (r#"{"review_id":"r1","star_rating":4,"helpful_votes":1,"total_votes":2,"text":""}"#, "product_id"),
            (
                r#"{"review_id":7,"product_id":"p","star_rating":4,"helpful_votes":1,"total_votes":2,"text":""}"#,
                "review_id",
            ),
        ];
        for (src, field) in cases {
            match load_reviews(src.as_bytes(), Format::Jsonl, "x") {
                Err(Error::Field { line: 1, field: f, .. }) => assert_eq!(f, field),
                other => panic!("{src}: {other:?}"),
            }
        }
        assert!(matches!(load_reviews(&b"{not json"[..], Format::Jsonl, "x"), Err(Error::Record { line: 1, .. })));
    }

    #[test]
    fn rejects_duplicate_ids() {
        let line =
            r#"{"review_id":"r1","product_id":"p1","star_rating":4,"helpful_votes":1,"total_votes":2,"text":""}"#;
        let src = format!("{line}\n{line}\n");
        assert!(matches!(load_reviews(src.as_bytes(), Format::Jsonl, "x"), Err(Error::DuplicateId { line: 2, .. })));
    }

    #[test]
    fn csv_quoted_text_and_errors() {
        let src = "review_id,product_id,star_rating,helpful_votes,total_votes,text,version_group\n\
                   r1,p1,4,3,10,\"Hello, \"\"world\"\"\nsecond line\",g1\n\
                   r2,p2,2,1,12,plain,\n";
        let c = load_reviews(src.as_bytes(), Format::Csv, "x").unwrap();
        assert_eq!(c.reviews[0].text, "Hello, \"world\"\nsecond line");
        assert_eq!(c.reviews[0].version_group.as_deref(), Some("g1"));
        assert_eq!(c.reviews[1].version_group, None);

        let bad = "review_id,product_id,star_rating,helpful_votes,total_votes,text\nr1,p1,4,3,10,a\nr2,p1,4,11,10,b\n";
        let err = load_reviews(bad.as_bytes(), Format::Csv, "x").unwrap_err();
        assert!(err.to_string().starts_with("line 3:"), "{err}");

        let missing = "review_id,product_id,star_rating,helpful_votes,text\n";
        assert!(
            matches!(load_reviews(missing.as_bytes(), Format::Csv, "x"), Err(Error::Field { field, .. }) if field == "total_votes")
        );
    }

    #[test]
    fn min_votes_filter() {
        let c =
            Corpus::new("x", vec![review("a", "p", 3, 1, 3), review("b", "p", 3, 1, 10), review("c", "q", 3, 1, 12)]);
        assert_eq!(filter_min_votes(&c, 10).len(), 2);
        assert_eq!(filter_min_votes(&c, 0), c);
    }

    #[test]
    fn mechanical_dedup_keeps_most_voted_copy() {
        let mut a = review("a", "p1", 4, 5, 12);
        let mut b = review("b", "p2", 4, 30, 40);
        a.text = "Same text!".into();
        b.text = "same   TEXT".into();
        a.version_group = Some("g".into());
        b.version_group = Some("g".into());
        let c = Corpus::new("x", vec![a.clone(), b.clone()]);
        let d = dedup_mechanical(&c);
        assert_eq!(d.reviews, vec![b.clone()]);

        let mut b2 = b.clone();
        b2.version_group = Some("h".into());
        let c = Corpus::new("x", vec![a.clone(), b2]);
        assert_eq!(dedup_mechanical(&c).len(), 2);

        // equal votes: smallest id wins
        let mut a2 = a.clone();
        a2.total_votes = 40;
        let c = Corpus::new("x", vec![b.clone(), a2.clone()]);
        assert_eq!(dedup_mechanical(&c).reviews, vec![a2]);
    }

    fn arb_review(i: usize) -> impl Strategy<Value = Review> {
        (0u8..6, 1u8..=5, 0u64..30, 0u64..20, 0usize..4, proptest::option::of(0u8..3)).prop_map(
            move |(p, stars, helpful, extra, text, group)| Review {
                review_id: format!("r{i:04}"),
                product_id: format!("p{p}"),
                star_rating: stars,
                helpful_votes: helpful,
                total_votes: helpful + extra,
                text: ["Great read.", "great READ", "Too long, \"boring\".\nSkip it", ""][text].to_string(),
                version_group: group.map(|g| format!("g{g}")),
            },
        )
    }

    fn arb_corpus(max: usize) -> impl Strategy<Value = Corpus> {
        (0..max).prop_flat_map(|n| (0..n).map(arb_review).collect::<Vec<_>>()).prop_map(|r| Corpus::new("prop", r))
    }

    /// Brute-force mechanical dedup: group everything, then pick winners by sorting.
    fn dedup_oracle(c: &Corpus) -> Vec<Review> {
        let mut groups: BTreeMap<(String, String, u8), Vec<&Review>> = BTreeMap::new();
        for r in &c.reviews {
            if let Some(g) = &r.version_group {
                let key = (g.clone(), normalize_text(&r.text), r.star_rating);
                groups.entry(key).or_default().push(r);
            }
        }
        let mut winners = HashSet::new();
        for members in groups.values_mut() {
            members.sort_by(|x, y| y.total_votes.cmp(&x.total_votes).then(x.review_id.cmp(&y.review_id)));
            winners.insert(members[0].review_id.clone());
        }
        c.reviews.iter().filter(|r| r.version_group.is_none() || winners.contains(&r.review_id)).cloned().collect()
    }

    proptest! {
        #[test]
        fn jsonl_and_csv_round_trip(c in arb_corpus(40)) {
            for format in [Format::Jsonl, Format::Csv] {
                let mut buf = Vec::new();
                c.write(&mut buf, format).unwrap();
                let back = load_reviews(&buf[..], format, "prop").unwrap();
                prop_assert_eq!(&back, &c);
            }
        }

        #[test]
        fn filter_matches_scan_and_is_idempotent(c in arb_corpus(200), m in 0u64..25) {
            let f = filter_min_votes(&c, m);
            let oracle: Vec<Review> = c.reviews.iter().filter(|r| r.total_votes >= m).cloned().collect();
            prop_assert_eq!(&f.reviews, &oracle);
            prop_assert_eq!(filter_min_votes(&f, m), f);
        }

        #[test]
        fn dedup_matches_grouping_oracle(c in arb_corpus(120)) {
            let d = dedup_mechanical(&c);
            prop_assert_eq!(&d.reviews, &dedup_oracle(&c));
            prop_assert_eq!(dedup_mechanical(&d), d.clone());
            // a review unique within its version group always survives
            for r in &c.reviews {
                if let Some(g) = &r.version_group {
                    let alone = c.reviews.iter().filter(|o| o.version_group.as_ref() == Some(g)).count() == 1;
                    if alone {
                        prop_assert!(d.reviews.contains(r));
                    }
                }
            }
        }
    }

    #[test]
    fn filter_oracle_on_1000_random_reviews() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let reviews: Vec<Review> = (0..1000)
            .map(|i| {
                let total = rng.random_range(0..40);
                review(
                    &format!("r{i}"),
                    &format!("p{}", i % 37),
                    rng.random_range(1..=5),
                    rng.random_range(0..=total),
                    total,
                )
            })
            .collect();
        let c = Corpus::new("x", reviews);
        let f = filter_min_votes(&c, 10);
        let mut kept = Vec::new();
        for r in &c.reviews {
            if r.total_votes >= 10 {
                kept.push(r.clone());
            }
        }
        assert_eq!(f.reviews, kept);
    }
}
