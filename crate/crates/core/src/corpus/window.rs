use super::records::AtomicDescription;

/// Default lookback window in seconds for gathering context descriptions.
pub const DEFAULT_WINDOW_SECONDS: f64 = 7.0;

/// Descriptions of `video_id` with timestamps in the closed interval
/// `[t - w, t]`, in ascending timestamp order. Ties keep input order.
pub fn window_descriptions(
    descriptions: &[AtomicDescription],
    video_id: &str,
    t: f64,
    w: f64,
) -> Vec<AtomicDescription> {
    let lo = t - w;
    let mut hits: Vec<AtomicDescription> = descriptions
        .iter()
        .filter(|d| d.video_id == video_id && d.t >= lo && d.t <= t)
        .cloned()
        .collect();
    hits.sort_by(|a, b| a.t.partial_cmp(&b.t).expect("finite timestamps"));
    hits
}
