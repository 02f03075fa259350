//! Event ingestion and the weighted implicit rating matrix.
//!
//! Raw feedback arrives as a line-oriented CSV of
//! `user_id,item_id,kind,timestamp` records. Each (user, item) pair gets a
//! rating computed as a weighted sum of the implicit signals observed for
//! it, and pairs with a positive rating become entries of a sparse
//! [`RatingMatrix`].

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The four implicit-feedback signals, ordered down the engagement funnel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    ListView,
    Click,
    AddToCart,
    Order,
}

impl EventKind {
    pub const ALL: [EventKind; 4] = [
        EventKind::ListView,
        EventKind::Click,
        EventKind::AddToCart,
        EventKind::Order,
    ];

    fn slot(self) -> usize {
        match self {
            EventKind::ListView => 0,
            EventKind::Click => 1,
            EventKind::AddToCart => 2,
            EventKind::Order => 3,
        }
    }
}

impl FromStr for EventKind {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "list_view" => Ok(EventKind::ListView),
            "click" => Ok(EventKind::Click),
            "add_to_cart" => Ok(EventKind::AddToCart),
            "order" => Ok(EventKind::Order),
            _ => Err(()),
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EventKind::ListView => "list_view",
            EventKind::Click => "click",
            EventKind::AddToCart => "add_to_cart",
            EventKind::Order => "order",
        };
        f.write_str(s)
    }
}

/// One observed user-item interaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub user_id: String,
    pub item_id: String,
    pub kind: EventKind,
    pub timestamp: u64,
}

impl Event {
    pub fn new(user_id: impl Into<String>, item_id: impl Into<String>, kind: EventKind, timestamp: u64) -> Self {
        Event { user_id: user_id.into(), item_id: item_id.into(), kind, timestamp }
    }
}

/// Per-signal weights for the implicit rating function.
///
/// With `use_frequency` unset a signal contributes its weight once if
/// present at all; set, it contributes weight times occurrence count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatingWeights {
    pub w_list_view: f64,
    pub w_click: f64,
    pub w_cart: f64,
    pub w_order: f64,
    pub use_frequency: bool,
}

impl RatingWeights {
    pub fn new(w_list_view: f64, w_click: f64, w_cart: f64, w_order: f64, use_frequency: bool) -> Result<Self> {
        let w = RatingWeights { w_list_view, w_click, w_cart, w_order, use_frequency };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let ws = [self.w_list_view, self.w_click, self.w_cart, self.w_order];
        if ws.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::ConfigInvalid("rating weights must be finite and >= 0".into()));
        }
        if ws.iter().all(|w| *w == 0.0) {
            return Err(Error::ConfigInvalid("at least one rating weight must be > 0".into()));
        }
        Ok(())
    }

    fn weight(&self, kind: EventKind) -> f64 {
        match kind {
            EventKind::ListView => self.w_list_view,
            EventKind::Click => self.w_click,
            EventKind::AddToCart => self.w_cart,
            EventKind::Order => self.w_order,
        }
    }
}

impl Default for RatingWeights {
    /// The best-performing weight set from the rating-function grid search.
    fn default() -> Self {
        RatingWeights { w_list_view: 0.25, w_click: 1.0, w_cart: 1.0, w_order: 1.0, use_frequency: false }
    }
}

/// How `parse_events` reacts to malformed lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseMode {
    /// Abort on the first malformed line.
    Strict,
    /// Skip malformed lines, recording them in the outcome.
    Lenient,
}

/// Result of a lenient or strict parse.
#[derive(Debug, Default)]
pub struct ParseOutcome {
    pub events: Vec<Event>,
    /// `(line_number, reason)` for every skipped line (lenient mode only).
    pub skipped: Vec<(usize, String)>,
}

/// Parse a line-oriented event log.
///
/// Each non-empty line must hold `user_id,item_id,kind,timestamp` with
/// `kind` one of `list_view|click|add_to_cart|order` and a non-negative
/// integer timestamp. Line numbers are 1-based. Empty lines are ignored.
pub fn parse_events<R: BufRead>(reader: R, mode: ParseMode) -> Result<ParseOutcome> {
    let mut outcome = ParseOutcome::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.is_empty() {
            continue;
        }
        match parse_line(line) {
            Ok(event) => outcome.events.push(event),
            Err(reason) => match mode {
                ParseMode::Strict => return Err(Error::MalformedLine { line: line_no, reason }),
                ParseMode::Lenient => outcome.skipped.push((line_no, reason)),
            },
        }
    }
    Ok(outcome)
}

fn parse_line(line: &str) -> std::result::Result<Event, String> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 4 {
        return Err(format!("expected 4 comma-separated fields, got {}", fields.len()));
    }
    let kind: EventKind = fields[2]
        .parse()
        .map_err(|_| format!("unknown event kind `{}`", fields[2]))?;
    let timestamp: u64 = fields[3]
        .parse()
        .map_err(|_| format!("timestamp `{}` is not a non-negative integer", fields[3]))?;
    Ok(Event { user_id: fields[0].to_string(), item_id: fields[1].to_string(), kind, timestamp })
}

/// Write events back out in the same CSV format `parse_events` reads.
pub fn write_events<W: std::io::Write>(w: &mut W, events: &[Event]) -> Result<()> {
    for e in events {
        writeln!(w, "{},{},{},{}", e.user_id, e.item_id, e.kind, e.timestamp)?;
    }
    Ok(())
}

/// Rating for one (user, item) pair from the events observed for it.
///
/// All events must belong to a single pair; an empty list rates 0.
pub fn compute_rating(events_for_pair: &[Event], weights: &RatingWeights) -> f64 {
    let mut counts = [0u64; 4];
    for e in events_for_pair {
        counts[e.kind.slot()] += 1;
    }
    rating_from_counts(&counts, weights)
}

fn rating_from_counts(counts: &[u64; 4], weights: &RatingWeights) -> f64 {
    let mut rating = 0.0;
    for kind in EventKind::ALL {
        let n = counts[kind.slot()];
        if n == 0 {
            continue;
        }
        let factor = if weights.use_frequency { n as f64 } else { 1.0 };
        rating += weights.weight(kind) * factor;
    }
    rating
}

/// Bijective map between opaque string ids and contiguous indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IdMap {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl IdMap {
    pub fn new() -> Self {
        IdMap::default()
    }

    /// Build from a list of unique ids, index = position.
    pub fn from_ids(ids: Vec<String>) -> Result<Self> {
        let mut map = IdMap::new();
        for id in ids {
            let before = map.len();
            map.intern(&id);
            if map.len() == before {
                return Err(Error::BadArtifact(format!("duplicate id `{id}` in id map")));
            }
        }
        Ok(map)
    }

    /// Index for `id`, assigning the next free index on first sight.
    pub fn intern(&mut self, id: &str) -> usize {
        if let Some(&idx) = self.index.get(id) {
            return idx;
        }
        let idx = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), idx);
        idx
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Sparse user-by-item matrix of positive implicit ratings (CSR, rows and
/// column indices sorted ascending).
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix {
    n_users: usize,
    n_items: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    user_ids: IdMap,
    item_ids: IdMap,
}

/// Column-major view of a [`RatingMatrix`].
#[derive(Debug, Clone)]
pub struct CscColumns {
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl RatingMatrix {
    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    /// Number of stored (positive) entries.
    pub fn n_entries(&self) -> usize {
        self.values.len()
    }

    /// Fraction of the user-item grid that carries a rating.
    pub fn density(&self) -> f64 {
        if self.n_users == 0 || self.n_items == 0 {
            return 0.0;
        }
        self.n_entries() as f64 / (self.n_users as f64 * self.n_items as f64)
    }

    pub fn user_ids(&self) -> &IdMap {
        &self.user_ids
    }

    pub fn item_ids(&self) -> &IdMap {
        &self.item_ids
    }

    /// Items rated by `user` as parallel slices of indices and ratings.
    pub fn row(&self, user: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[user];
        let hi = self.row_ptr[user + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    /// True if `user` has a stored rating for `item`.
    pub fn has_entry(&self, user: usize, item: usize) -> bool {
        self.row(user).0.binary_search(&item).is_ok()
    }

    /// All entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_users).flat_map(move |u| {
            let (items, ratings) = self.row(u);
            items.iter().zip(ratings).map(move |(&i, &r)| (u, i, r))
        })
    }

    /// Column-major copy for per-item traversals.
    pub fn to_csc(&self) -> CscColumns {
        let nnz = self.values.len();
        let mut counts = vec![0usize; self.n_items];
        for &i in &self.col_idx {
            counts[i] += 1;
        }
        let mut col_ptr = vec![0usize; self.n_items + 1];
        for i in 0..self.n_items {
            col_ptr[i + 1] = col_ptr[i] + counts[i];
        }
        let mut row_idx = vec![0usize; nnz];
        let mut values = vec![0.0f64; nnz];
        let mut cursor = col_ptr.clone();
        for u in 0..self.n_users {
            let (items, ratings) = self.row(u);
            for (&i, &r) in items.iter().zip(ratings) {
                let p = cursor[i];
                row_idx[p] = u;
                values[p] = r;
                cursor[i] += 1;
            }
        }
        CscColumns { col_ptr, row_idx, values }
    }

    /// Copy with every stored rating replaced by 1.0.
    pub fn binarized(&self) -> RatingMatrix {
        let mut m = self.clone();
        for v in &mut m.values {
            *v = 1.0;
        }
        m
    }
}

/// Build the rating matrix from an event list.
///
/// Indices are assigned by first appearance of each id in the event list,
/// so identical input always produces an identical matrix. Pairs whose
/// rating comes out zero are dropped.
pub fn build_matrix(events: &[Event], weights: &RatingWeights) -> Result<RatingMatrix> {
    weights.validate()?;
    if events.is_empty() {
        return Err(Error::EmptyInput);
    }

    let mut user_ids = IdMap::new();
    let mut item_ids = IdMap::new();
    let mut counts: HashMap<(usize, usize), [u64; 4]> = HashMap::new();
    for e in events {
        let u = user_ids.intern(&e.user_id);
        let i = item_ids.intern(&e.item_id);
        counts.entry((u, i)).or_default()[e.kind.slot()] += 1;
    }

    let mut entries: Vec<(usize, usize, f64)> = counts
        .iter()
        .filter_map(|(&(u, i), c)| {
            let r = rating_from_counts(c, weights);
            (r > 0.0).then_some((u, i, r))
        })
        .collect();
    entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

    let n_users = user_ids.len();
    let n_items = item_ids.len();
    let mut row_ptr = vec![0usize; n_users + 1];
    for &(u, _, _) in &entries {
        row_ptr[u + 1] += 1;
    }
    for u in 0..n_users {
        row_ptr[u + 1] += row_ptr[u];
    }
    let col_idx = entries.iter().map(|&(_, i, _)| i).collect();
    let values = entries.iter().map(|&(_, _, r)| r).collect();

    Ok(RatingMatrix { n_users, n_items, row_ptr, col_idx, values, user_ids, item_ids })
}

/// Build a matrix directly from `(user, item, rating)` triples over known
/// dimensions. Intended for tests and synthetic setups.
pub fn matrix_from_entries(
    n_users: usize,
    n_items: usize,
    entries: &[(usize, usize, f64)],
) -> Result<RatingMatrix> {
    let mut sorted = entries.to_vec();
    sorted.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    for pair in sorted.windows(2) {
        if (pair[0].0, pair[0].1) == (pair[1].0, pair[1].1) {
            return Err(Error::ConfigInvalid(format!(
                "duplicate entry for pair ({}, {})",
                pair[0].0, pair[0].1
            )));
        }
    }
    let mut row_ptr = vec![0usize; n_users + 1];
    for &(u, i, r) in &sorted {
        if u >= n_users || i >= n_items {
            return Err(Error::IndexOutOfRange { index: u.max(i), len: n_users.max(n_items) });
        }
        if !(r > 0.0) {
            return Err(Error::ConfigInvalid(format!("rating for ({u}, {i}) must be > 0")));
        }
        row_ptr[u + 1] += 1;
    }
    for u in 0..n_users {
        row_ptr[u + 1] += row_ptr[u];
    }
    let col_idx = sorted.iter().map(|&(_, i, _)| i).collect();
    let values = sorted.iter().map(|&(_, _, r)| r).collect();
    let user_ids = IdMap::from_ids((0..n_users).map(|u| format!("u{u}")).collect())?;
    let item_ids = IdMap::from_ids((0..n_items).map(|i| format!("p{i}")).collect())?;
    Ok(RatingMatrix { n_users, n_items, row_ptr, col_idx, values, user_ids, item_ids })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(u: &str, i: &str, kind: EventKind, ts: u64) -> Event {
        Event::new(u, i, kind, ts)
    }

    #[test]
    fn parse_single_line() {
        let out = parse_events("u1,p9,click,100".as_bytes(), ParseMode::Strict).unwrap();
        assert_eq!(out.events, vec![ev("u1", "p9", EventKind::Click, 100)]);
        assert!(out.skipped.is_empty());
    }

    #[test]
    fn parse_empty_input() {
        let out = parse_events("".as_bytes(), ParseMode::Strict).unwrap();
        assert!(out.events.is_empty());
    }

    #[test]
    fn parse_unknown_kind_strict() {
        let err = parse_events("u1,p9,swipe,100".as_bytes(), ParseMode::Strict).unwrap_err();
        match err {
            Error::MalformedLine { line, .. } => assert_eq!(line, 1),
            other => panic!("expected MalformedLine, got {other:?}"),
        }
    }

    #[test]
    fn parse_lenient_skips_and_reports() {
        let input = "u1,p1,click,1\nu1,p1,swipe,2\nbroken\nu2,p2,order,-3\nu2,p2,order,3\n";
        let out = parse_events(input.as_bytes(), ParseMode::Lenient).unwrap();
        assert_eq!(out.events.len(), 2);
        let lines: Vec<usize> = out.skipped.iter().map(|(l, _)| *l).collect();
        assert_eq!(lines, vec![2, 3, 4]);
    }

    #[test]
    fn parse_preserves_file_order() {
        let input = "u2,p2,order,5\nu1,p1,click,1\n";
        let out = parse_events(input.as_bytes(), ParseMode::Strict).unwrap();
        assert_eq!(out.events[0].user_id, "u2");
        assert_eq!(out.events[1].user_id, "u1");
    }

    fn sample_pair_events() -> Vec<Event> {
        vec![
            ev("u", "p", EventKind::ListView, 1),
            ev("u", "p", EventKind::ListView, 2),
            ev("u", "p", EventKind::Click, 3),
            ev("u", "p", EventKind::Order, 4),
        ]
    }

    #[test]
    fn rating_presence_mode() {
        let w = RatingWeights::new(0.25, 1.0, 1.0, 1.0, false).unwrap();
        assert_eq!(compute_rating(&sample_pair_events(), &w), 2.25);
    }

    #[test]
    fn rating_frequency_mode() {
        let w = RatingWeights::new(0.25, 1.0, 1.0, 1.0, true).unwrap();
        assert_eq!(compute_rating(&sample_pair_events(), &w), 2.5);
    }

    #[test]
    fn rating_empty_events() {
        let w = RatingWeights::default();
        assert_eq!(compute_rating(&[], &w), 0.0);
    }

    #[test]
    fn rating_order_invariant() {
        let w = RatingWeights::new(0.25, 1.0, 1.0, 1.0, true).unwrap();
        let mut events = sample_pair_events();
        events.reverse();
        assert_eq!(compute_rating(&events, &w), 2.5);
    }

    #[test]
    fn matrix_shape_from_events() {
        let events = vec![
            ev("u1", "p1", EventKind::Click, 1),
            ev("u2", "p2", EventKind::Click, 2),
            ev("u1", "p2", EventKind::Order, 3),
        ];
        let m = build_matrix(&events, &RatingWeights::default()).unwrap();
        assert_eq!(m.n_users(), 2);
        assert_eq!(m.n_items(), 2);
        assert!(m.n_entries() <= 4);
        assert_eq!(m.n_entries(), 3);
    }

    #[test]
    fn matrix_single_order_event() {
        let w = RatingWeights::new(0.0, 0.0, 0.0, 1.0, false).unwrap();
        let m = build_matrix(&[ev("u1", "p1", EventKind::Order, 9)], &w).unwrap();
        let entries: Vec<_> = m.entries().collect();
        assert_eq!(entries, vec![(0, 0, 1.0)]);
    }

    #[test]
    fn matrix_drops_zero_rated_pairs() {
        // Clicks carry weight zero, so the (u2, p2) pair must vanish while
        // its ids still receive indices.
        let w = RatingWeights::new(0.0, 0.0, 0.0, 1.0, false).unwrap();
        let events = vec![
            ev("u1", "p1", EventKind::Order, 1),
            ev("u2", "p2", EventKind::Click, 2),
        ];
        let m = build_matrix(&events, &w).unwrap();
        assert_eq!(m.n_users(), 2);
        assert_eq!(m.n_items(), 2);
        assert_eq!(m.n_entries(), 1);
        assert!(!m.has_entry(1, 1));
    }

    #[test]
    fn matrix_empty_input_errors() {
        let err = build_matrix(&[], &RatingWeights::default()).unwrap_err();
        assert!(matches!(err, Error::EmptyInput));
    }

    #[test]
    fn matrix_first_appearance_indexing() {
        let events = vec![
            ev("b", "y", EventKind::Click, 1),
            ev("a", "x", EventKind::Click, 2),
        ];
        let m = build_matrix(&events, &RatingWeights::default()).unwrap();
        assert_eq!(m.user_ids().get("b"), Some(0));
        assert_eq!(m.user_ids().get("a"), Some(1));
        assert_eq!(m.item_ids().get("y"), Some(0));
        assert_eq!(m.item_ids().get("x"), Some(1));
    }

    #[test]
    fn csc_round_trips_entries() {
        let events = vec![
            ev("u1", "p1", EventKind::Click, 1),
            ev("u2", "p1", EventKind::Order, 2),
            ev("u1", "p2", EventKind::ListView, 3),
        ];
        let m = build_matrix(&events, &RatingWeights::default()).unwrap();
        let csc = m.to_csc();
        let mut from_csc = Vec::new();
        for i in 0..m.n_items() {
            for p in csc.col_ptr[i]..csc.col_ptr[i + 1] {
                from_csc.push((csc.row_idx[p], i, csc.values[p]));
            }
        }
        let mut from_csr: Vec<_> = m.entries().collect();
        from_csr.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        assert_eq!(from_csc, from_csr);
    }

    #[test]
    fn weights_all_zero_rejected() {
        assert!(RatingWeights::new(0.0, 0.0, 0.0, 0.0, false).is_err());
    }

    #[test]
    fn event_csv_round_trip() {
        let events = vec![
            ev("u1", "p1", EventKind::ListView, 0),
            ev("u1", "p2", EventKind::AddToCart, 7),
        ];
        let mut buf = Vec::new();
        write_events(&mut buf, &events).unwrap();
        let parsed = parse_events(buf.as_slice(), ParseMode::Strict).unwrap();
        assert_eq!(parsed.events, events);
    }
}
