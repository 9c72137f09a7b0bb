//! CSV layouts of the stage outputs.

use std::collections::BTreeMap;

use super::output::{csv_table, num, opt_num};
use crate::analysis::{
    AdoptionTable, HostSegmentation, LabeledSetAdoption, NeighbourhoodReport, NullModelReport, PeriodComparison,
    RoomTypeValidation, SegmentScore, TrendSlope,
};
use crate::corpus::{BinKey, Dimension};
use crate::induction::{GridEntry, InductionTable};
use crate::metrics::{GainEntry, GainReport};
use crate::stats::TestMethod;
use crate::taxonomy::Dictionary;

fn dim_name(d: Dimension) -> &'static str {
    match d {
        Dimension::City => "city",
        Dimension::Year => "year",
        Dimension::RoomType => "room_type",
        Dimension::LengthBucket => "length_bucket",
        Dimension::HostSegment => "host_segment",
        Dimension::District => "district",
    }
}

fn field(k: &BinKey, d: Dimension) -> String {
    match d {
        Dimension::City => k.city.clone().unwrap_or_default(),
        Dimension::Year => k.year.map(|y| y.to_string()).unwrap_or_default(),
        Dimension::RoomType => k.room_type.map(|r| r.label().to_owned()).unwrap_or_default(),
        Dimension::LengthBucket => k.length_bucket.map(|(a, b)| format!("{a}-{b}")).unwrap_or_default(),
        Dimension::HostSegment => k.host_segment.map(|s| s.label().to_owned()).unwrap_or_default(),
        Dimension::District => k.district.clone().unwrap_or_default(),
    }
}

/// The set dimensions of a key as `dim=value` pairs joined by `;`.
fn group(k: &BinKey) -> String {
    let dims = [
        Dimension::City,
        Dimension::Year,
        Dimension::RoomType,
        Dimension::LengthBucket,
        Dimension::HostSegment,
        Dimension::District,
    ];
    let parts: Vec<String> = dims
        .iter()
        .map(|&d| (d, field(k, d)))
        .filter(|(_, v)| !v.is_empty())
        .map(|(d, v)| format!("{}={v}", dim_name(d)))
        .collect();
    if parts.is_empty() {
        "all".into()
    } else {
        parts.join(";")
    }
}

pub fn adoption(t: &AdoptionTable) -> Vec<u8> {
    let mut header: Vec<&str> = t.dims.iter().map(|&d| dim_name(d)).collect();
    header.extend([
        "tier",
        "category",
        "adoption",
        "stacked",
        "n_reviews",
        "k_offset",
        "below_min_sample",
    ]);
    let rows = t.rows.iter().map(|r| {
        let mut row: Vec<String> = t.dims.iter().map(|&d| field(&r.key, d)).collect();
        row.extend([
            r.category.tier.level().to_string(),
            r.category.label.clone(),
            num(r.value.percent),
            num(r.stacked_percent),
            r.value.n_reviews.to_string(),
            num(r.value.k_offset),
            r.value.below_min_sample.to_string(),
        ]);
        row
    });
    csv_table(&header, rows)
}

pub fn slope_rows(slopes: &[TrendSlope]) -> Vec<Vec<String>> {
    slopes
        .iter()
        .map(|s| {
            vec![
                group(&s.group),
                s.category.tier.level().to_string(),
                s.category.label.clone(),
                num(s.slope),
                s.n_years.to_string(),
            ]
        })
        .collect()
}

pub fn slope_csv(rows: Vec<Vec<String>>) -> Vec<u8> {
    csv_table(&["group", "tier", "category", "slope_pp_per_year", "n_years"], rows)
}

pub fn null_slopes(r: &NullModelReport) -> Vec<u8> {
    let mut rows = Vec::new();
    for (corpus, slopes) in [
        ("observed", &r.observed_slopes),
        ("shuffled", &r.shuffled_slopes),
        ("observed", &r.pooled_observed_slopes),
        ("shuffled", &r.pooled_shuffled_slopes),
    ] {
        for mut row in slope_rows(slopes) {
            row.insert(0, corpus.to_owned());
            rows.push(row);
        }
    }
    csv_table(&["corpus", "group", "tier", "category", "slope_pp_per_year", "n_years"], rows)
}

pub fn wilcoxon(cs: &[PeriodComparison]) -> Vec<u8> {
    let rows = cs.iter().map(|c| {
        vec![
            if c.shuffled { "shuffled" } else { "observed" }.to_owned(),
            c.category.label.clone(),
            c.early_n.to_string(),
            c.late_n.to_string(),
            num(c.test.statistic),
            num(c.test.u_statistic),
            num(c.test.p_value),
            match c.test.method {
                TestMethod::Exact => "exact",
                TestMethod::NormalApprox => "normal",
            }
            .to_owned(),
        ]
    });
    csv_table(
        &["corpus", "category", "early_n", "late_n", "rank_sum", "u", "p_value", "method"],
        rows,
    )
}

pub fn room_type(v: &RoomTypeValidation) -> Vec<u8> {
    let rows = v.changes.iter().map(|c| {
        vec![
            c.city.clone(),
            c.category.clone(),
            num(c.entire_home),
            num(c.shared_private),
            num(c.relative_change_pct),
            c.n_entire_home.to_string(),
            c.n_shared_private.to_string(),
        ]
    });
    csv_table(
        &[
            "city",
            "category",
            "entire_home",
            "shared_private",
            "relative_change_pct",
            "n_entire_home",
            "n_shared_private",
        ],
        rows,
    )
}

pub fn hosts(s: &HostSegmentation) -> Vec<u8> {
    let mut rows: Vec<_> = s
        .join_dates
        .iter()
        .filter_map(|(k, d)| s.segments.get(k).map(|seg| (&k.city, *d, &k.host_id, *seg)))
        .collect();
    rows.sort();
    csv_table(
        &["city", "join_date", "host_id", "segment"],
        rows.into_iter()
            .map(|(c, d, h, seg)| vec![c.clone(), d.to_string(), h.clone(), seg.label().to_owned()]),
    )
}

pub fn adoption_curve(s: &HostSegmentation) -> Vec<u8> {
    csv_table(
        &["city", "year", "new_hosts"],
        s.adoption_curve
            .iter()
            .map(|((c, y), n)| vec![c.clone(), y.to_string(), n.to_string()]),
    )
}

pub fn segment_scores(scores: &[SegmentScore]) -> Vec<u8> {
    csv_table(
        &["city", "year", "segment", "social_score", "n_reviews"],
        scores.iter().map(|s| {
            vec![
                s.city.clone().unwrap_or_else(|| "all".into()),
                s.year.to_string(),
                s.segment.label().to_owned(),
                num(s.score),
                s.n_reviews.to_string(),
            ]
        }),
    )
}

pub fn districts(r: &NeighbourhoodReport) -> Vec<u8> {
    csv_table(
        &["city", "district", "active_listings", "penetration", "social_score", "n_reviews"],
        r.districts.iter().map(|d| {
            vec![
                d.city.clone(),
                d.district.clone(),
                d.active_listings.to_string(),
                num(d.penetration),
                opt_num(d.social_score),
                d.n_reviews.to_string(),
            ]
        }),
    )
}

pub fn correlations(r: &NeighbourhoodReport) -> Vec<u8> {
    csv_table(
        &["city", "pearson_r", "p_value", "n_districts"],
        r.correlations.iter().map(|c| {
            vec![
                c.city.clone(),
                num(c.correlation.r),
                num(c.correlation.p_value),
                c.correlation.n.to_string(),
            ]
        }),
    )
}

pub fn gain_words(scopes: &[(String, Vec<GainEntry>)], dict: &Dictionary) -> Vec<u8> {
    let rows = scopes.iter().flat_map(|(scope, entries)| {
        entries.iter().map(move |e| {
            let path = dict.path_of(&e.word);
            vec![
                scope.clone(),
                e.word.clone(),
                num(e.tf_a),
                num(e.tf_b),
                opt_num(e.gain),
                e.status.label().to_owned(),
                path.map(|p| p.level3.to_owned()).unwrap_or_default(),
                path.map(|p| p.level1.to_owned()).unwrap_or_default(),
            ]
        })
    });
    csv_table(
        &["scope", "word", "tf_late", "tf_early", "gain", "status", "level3", "level1"],
        rows,
    )
}

pub fn gain_density(reports: &[(String, GainReport)]) -> Vec<u8> {
    let rows = reports.iter().flat_map(|(scope, r)| {
        r.densities.iter().map(move |d| {
            vec![
                scope.clone(),
                d.level1.clone(),
                num(d.log10_gain_lo),
                num(d.log10_gain_hi),
                num(d.share),
                d.n_words.to_string(),
            ]
        })
    });
    csv_table(
        &["scope", "level1", "log10_gain_lo", "log10_gain_hi", "share", "n_words"],
        rows,
    )
}

pub fn gain_extremes(reports: &[(String, GainReport)]) -> Vec<u8> {
    let mut rows = Vec::new();
    for (scope, r) in reports {
        for (end, list) in [("top", &r.top), ("bottom", &r.bottom)] {
            for (i, g) in list.iter().enumerate() {
                rows.push(vec![
                    scope.clone(),
                    end.to_owned(),
                    (i + 1).to_string(),
                    g.word.clone(),
                    g.level3.clone(),
                    g.level1.clone(),
                    num(g.gain),
                ]);
            }
        }
    }
    csv_table(&["scope", "end", "rank", "word", "level3", "level1", "gain"], rows)
}

pub fn labeled_sets(t: &LabeledSetAdoption) -> Vec<u8> {
    let change = |a: f64, b: f64| if a > 0.0 { num((b - a) / a * 100.0) } else { "NA".into() };
    let rows = vec![
        vec![
            "business".to_owned(),
            num(t.business_on_business.percent),
            num(t.business_on_social.percent),
            change(t.business_on_business.percent, t.business_on_social.percent),
        ],
        vec![
            "social".to_owned(),
            num(t.social_on_business.percent),
            num(t.social_on_social.percent),
            change(t.social_on_business.percent, t.social_on_social.percent),
        ],
        vec![
            "n_sentences".to_owned(),
            t.n_business.to_string(),
            t.n_social.to_string(),
            String::new(),
        ],
    ];
    csv_table(&["category", "business_set", "social_set", "change_pct"], rows)
}

pub fn word_stats(t: &InductionTable) -> Vec<u8> {
    let rows = t.themes.iter().flat_map(|(theme, ws)| {
        ws.iter()
            .map(move |w| vec![theme.clone(), w.word.clone(), num(w.tf), num(w.tf_out), num(w.gain)])
    });
    csv_table(&["theme", "word", "tf", "tf_out", "gain"], rows)
}

pub fn kappa(k: &BTreeMap<String, f64>) -> Vec<u8> {
    csv_table(
        &["theme", "fleiss_kappa"],
        k.iter().map(|(t, v)| vec![t.clone(), num(*v)]),
    )
}

pub fn threshold_grid(g: &[GridEntry]) -> Vec<u8> {
    let mut rows = Vec::new();
    for (i, e) in g.iter().enumerate() {
        let base = vec![
            (i + 1).to_string(),
            num(e.thresholds.tf_min),
            num(e.thresholds.tf_max),
            num(e.thresholds.gain_min),
            e.lexicon_size.to_string(),
        ];
        if e.added.is_empty() {
            let mut r = base.clone();
            r.extend([String::new(), String::new()]);
            rows.push(r);
        }
        for (w, t) in &e.added {
            let mut r = base.clone();
            r.extend([w.clone(), t.clone()]);
            rows.push(r);
        }
    }
    csv_table(
        &["step", "tf_min", "tf_max", "gain_min", "lexicon_size", "added_word", "theme"],
        rows,
    )
}

pub fn dictionary_words(d: &Dictionary) -> Vec<u8> {
    csv_table(
        &["level1", "level2", "level3", "word"],
        d.words().map(|(w, _)| {
            let p = d.path_of(w).expect("dictionary word");
            vec![p.level1.to_owned(), p.level2.to_owned(), p.level3.to_owned(), w.to_owned()]
        }),
    )
}
