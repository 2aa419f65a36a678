use num_traits::ToPrimitive;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hit<S> {
    pub listing: String,
    pub score: S,
}

/// Listings for one query, best first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedResult<S> {
    pub query: String,
    #[serde(rename = "results")]
    pub hits: Vec<Hit<S>>,
}

impl<S: ToPrimitive + Copy> RankedResult<S> {
    /// `(listing, score)` pairs with scores widened to `f64`.
    pub fn scored(&self) -> Vec<(String, f64)> {
        self.hits
            .iter()
            .map(|h| (h.listing.clone(), h.score.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }
}

impl<S> RankedResult<S> {
    pub fn len(&self) -> usize {
        self.hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }
}
