use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::Serialize;

use super::{parse_date, tokenize, Listing, Review, RoomType};
use crate::error::{Error, Result};
use crate::par;

/// Row accounting for a reviews file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub rows: usize,
    pub kept: usize,
    pub malformed: usize,
    pub no_comment: usize,
    pub bad_date: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ListingReport {
    pub rows: usize,
    pub kept: usize,
    pub malformed: usize,
    pub bad_room_type: usize,
    pub bad_coordinates: usize,
}

fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(true)
        .from_reader(file))
}

fn column(headers: &csv::StringRecord, path: &Path, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::MissingColumn {
            path: path.to_path_buf(),
            column: name.to_owned(),
        })
}

fn optional_column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

struct RawReview {
    review_id: String,
    listing_id: String,
    reviewer_id: String,
    date: Option<chrono::NaiveDate>,
    text: String,
    language: Option<String>,
}

/// Read an Inside-Airbnb style reviews file.
///
/// Rows with an empty comment or an unparseable date are counted and
/// skipped; an empty date is kept as `None` so the filter can account for
/// it. Tokenization runs in parallel.
pub fn ingest_reviews(path: impl AsRef<Path>, city: &str) -> Result<(Vec<Review>, IngestReport)> {
    let path = path.as_ref();
    let mut rdr = open_csv(path)?;
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let c_listing = column(&headers, path, "listing_id")?;
    let c_id = column(&headers, path, "id")?;
    let c_date = column(&headers, path, "date")?;
    let c_reviewer = column(&headers, path, "reviewer_id")?;
    let c_comments = column(&headers, path, "comments")?;
    let c_lang = optional_column(&headers, "language");
    let width = headers.len();

    let mut report = IngestReport::default();
    let mut raw = Vec::new();
    for rec in rdr.records() {
        report.rows += 1;
        let rec = match rec {
            Ok(r) if r.len() == width => r,
            Ok(_) => {
                report.malformed += 1;
                continue;
            }
            Err(e) if e.is_io_error() => return Err(Error::csv(path, e)),
            Err(_) => {
                report.malformed += 1;
                continue;
            }
        };
        let text = rec[c_comments].trim();
        if text.is_empty() {
            report.no_comment += 1;
            continue;
        }
        let date_field = rec[c_date].trim();
        let date = if date_field.is_empty() {
            None
        } else {
            match parse_date(date_field) {
                Some(d) => Some(d),
                None => {
                    report.bad_date += 1;
                    continue;
                }
            }
        };
        raw.push(RawReview {
            review_id: rec[c_id].trim().to_owned(),
            listing_id: rec[c_listing].trim().to_owned(),
            reviewer_id: rec[c_reviewer].trim().to_owned(),
            date,
            text: rec[c_comments].to_owned(),
            language: c_lang
                .map(|c| rec[c].trim().to_owned())
                .filter(|l| !l.is_empty()),
        });
    }

    let reviews = par::map(&raw, |r| {
        let tokens = tokenize(&r.text);
        let mut review = Review::from_tokens(
            r.review_id.clone(),
            r.listing_id.clone(),
            r.reviewer_id.clone(),
            r.date,
            r.text.clone(),
            tokens,
            city,
        );
        review.language = r.language.clone();
        review
    });
    report.kept = reviews.len();
    Ok((reviews, report))
}

fn parse_coord(field: &str, limit: f64) -> std::result::Result<Option<f64>, ()> {
    let field = field.trim();
    if field.is_empty() {
        return Ok(None);
    }
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() && v.abs() <= limit => Ok(Some(v)),
        _ => Err(()),
    }
}

/// Read an Inside-Airbnb style listings file.
pub fn ingest_listings(path: impl AsRef<Path>, city: &str) -> Result<(Vec<Listing>, ListingReport)> {
    let path = path.as_ref();
    let mut rdr = open_csv(path)?;
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let c_id = column(&headers, path, "id")?;
    let c_host = column(&headers, path, "host_id")?;
    let c_room = column(&headers, path, "room_type")?;
    let c_lat = column(&headers, path, "latitude")?;
    let c_lon = column(&headers, path, "longitude")?;
    let c_since = optional_column(&headers, "host_since");
    let width = headers.len();

    let mut report = ListingReport::default();
    let mut out = Vec::new();
    for rec in rdr.records() {
        report.rows += 1;
        let rec = match rec {
            Ok(r) if r.len() == width => r,
            Err(e) if e.is_io_error() => return Err(Error::csv(path, e)),
            _ => {
                report.malformed += 1;
                continue;
            }
        };
        let id = rec[c_id].trim();
        let host = rec[c_host].trim();
        if id.is_empty() || host.is_empty() {
            report.malformed += 1;
            continue;
        }
        let Ok(room_type) = rec[c_room].parse::<RoomType>() else {
            report.bad_room_type += 1;
            continue;
        };
        let (Ok(latitude), Ok(longitude)) = (parse_coord(&rec[c_lat], 90.0), parse_coord(&rec[c_lon], 180.0))
        else {
            report.bad_coordinates += 1;
            continue;
        };
        out.push(Listing {
            listing_id: id.to_owned(),
            host_id: host.to_owned(),
            room_type,
            latitude,
            longitude,
            city: city.to_owned(),
            host_since: c_since.and_then(|c| parse_date(&rec[c])),
        });
    }
    report.kept = out.len();
    Ok((out, report))
}

const CLEANED_HEADER: &str = "review_id\tlisting_id\treviewer_id\tdate\tcity\ttokens";

fn check_field(value: &str, what: &str) -> Result<()> {
    if value.contains(['\t', '\n', '\r']) {
        return Err(Error::Data(format!("{what} `{value}` contains a tab or newline")));
    }
    Ok(())
}

/// Write reviews as a tab-separated cleaned corpus, one review per line.
pub fn write_cleaned_corpus<W: Write>(mut out: W, reviews: &[Review]) -> Result<()> {
    let io = |e| Error::io("<cleaned corpus>", e);
    writeln!(out, "{CLEANED_HEADER}").map_err(io)?;
    for r in reviews {
        for (v, what) in [
            (&r.review_id, "review id"),
            (&r.listing_id, "listing id"),
            (&r.reviewer_id, "reviewer id"),
            (&r.city, "city"),
        ] {
            check_field(v, what)?;
        }
        let date = r.date.map(|d| d.format("%Y-%m-%d").to_string()).unwrap_or_default();
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.review_id,
            r.listing_id,
            r.reviewer_id,
            date,
            r.city,
            r.tokens.join(" ")
        )
        .map_err(io)?;
    }
    Ok(())
}

/// Read a cleaned corpus written by [`write_cleaned_corpus`].
pub fn read_cleaned_corpus(path: impl AsRef<Path>) -> Result<Vec<Review>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    match lines.next() {
        Some(Ok(h)) if h == CLEANED_HEADER => {}
        Some(Err(e)) => return Err(Error::io(path, e)),
        _ => {
            return Err(Error::Format {
                line: 1,
                message: format!("expected header `{CLEANED_HEADER}`"),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let lineno = i + 2;
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 6 {
            return Err(Error::Format {
                line: lineno,
                message: format!("expected 6 tab-separated fields, found {}", f.len()),
            });
        }
        let date = if f[3].is_empty() {
            None
        } else {
            Some(parse_date(f[3]).ok_or_else(|| Error::Format {
                line: lineno,
                message: format!("bad date `{}`", f[3]),
            })?)
        };
        let tokens: Vec<String> = f[5].split(' ').filter(|t| !t.is_empty()).map(str::to_owned).collect();
        out.push(Review::from_tokens(f[0], f[1], f[2], date, "", tokens, f[4]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    const HEADER: &str = "listing_id,id,date,reviewer_id,reviewer_name,comments\n";

    #[test]
    fn header_only() {
        let f = write_tmp(HEADER);
        let (reviews, report) = ingest_reviews(f.path(), "london").unwrap();
        assert!(reviews.is_empty());
        assert_eq!(report, IngestReport::default());
    }

    #[test]
    fn ten_rows_two_bad_dates() {
        let mut csv = HEADER.to_owned();
        for i in 0..10 {
            let date = if i == 3 {
                "2019-13-01"
            } else if i == 7 {
                "yesterday"
            } else {
                "2018-05-04"
            };
            csv.push_str(&format!(
                "{},{},{date},{},Guest,\"The flat was clean, and the host, Ann, was kind.\"\n",
                100 + i,
                i,
                500 + i
            ));
        }
        let f = write_tmp(&csv);
        let (reviews, report) = ingest_reviews(f.path(), "london").unwrap();
        assert_eq!(reviews.len(), 8);
        assert_eq!(report.bad_date, 2);
        assert_eq!(report.rows, 10);
        assert_eq!(reviews[0].raw_text, "The flat was clean, and the host, Ann, was kind.");
        assert_eq!(reviews[0].word_count, 10);
        assert_eq!(reviews[0].city, "london");
    }

    #[test]
    fn empty_comment_and_short_row() {
        let csv = format!("{HEADER}1,1,2018-01-01,9,A,\n1,2,2018-01-01\n1,3,,9,A,nice place to stay here\n");
        let f = write_tmp(&csv);
        let (reviews, report) = ingest_reviews(f.path(), "x").unwrap();
        assert_eq!(report.no_comment, 1);
        assert_eq!(report.malformed, 1);
        assert_eq!(reviews.len(), 1);
        assert_eq!(reviews[0].date, None);
    }

    #[test]
    fn missing_column_and_missing_file() {
        let f = write_tmp("listing_id,id,date,comments\n");
        match ingest_reviews(f.path(), "x") {
            Err(Error::MissingColumn { column, .. }) => assert_eq!(column, "reviewer_id"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            ingest_reviews("/definitely/not/here.csv", "x"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn listings() {
        let csv = "id,host_id,room_type,latitude,longitude,host_since\n\
                   1,10,Entire home/apt,51.5,-0.1,2012-03-04\n\
                   2,11,Private room,,,\n\
                   3,12,Hotel room,51.5,-0.1,\n\
                   4,13,Shared room,95.0,0.0,\n";
        let f = write_tmp(csv);
        let (ls, report) = ingest_listings(f.path(), "london").unwrap();
        assert_eq!(ls.len(), 2);
        assert_eq!(report.bad_room_type, 1);
        assert_eq!(report.bad_coordinates, 1);
        assert_eq!(ls[0].coordinates(), Some((51.5, -0.1)));
        assert_eq!(ls[1].coordinates(), None);
        assert_eq!(ls[0].host_since, parse_date("2012-03-04"));
    }

    #[test]
    fn cleaned_round_trip() {
        let r = Review::new("7", "70", "700", parse_date("2015-06-01"), "Lovely quiet flat", "new york");
        let mut buf = Vec::new();
        write_cleaned_corpus(&mut buf, std::slice::from_ref(&r)).unwrap();
        let f = write_tmp(std::str::from_utf8(&buf).unwrap());
        let back = read_cleaned_corpus(f.path()).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].tokens, r.tokens);
        assert_eq!(back[0].date, r.date);
        assert_eq!(back[0].city, "new york");
    }
}
