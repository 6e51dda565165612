//! Central finite-difference checks of [`Model::loss_and_gradients`].

use super::model::{Model, Step, TokenIds};

/// Agreement of one parameter block.
#[derive(Debug, Clone)]
pub struct BlockCheck {
    pub name: String,
    pub coordinates: usize,
    /// `‖analytic − numeric‖ / max(‖analytic‖, ‖numeric‖)` over the block;
    /// 0 when both vanish.
    pub relative_error: f64,
}

/// Compares analytic and numeric gradients of `L_t + L_p` for every block,
/// probing at most `max_per_block` evenly spaced coordinates per block.
pub fn check_gradients(
    model: &Model<f64>,
    ids: &TokenIds,
    gold_tags: &[Vec<Option<usize>>],
    steps: &[Step],
    h: f64,
    max_per_block: usize,
) -> Vec<BlockCheck> {
    let mut m = model.clone();
    let loss = |m: &Model<f64>| {
        let mut scratch = m.zeros_like();
        m.tagging_loss(ids, gold_tags, &mut scratch) + m.parsing_loss(ids, steps, &mut scratch)
    };
    let (_, _, grads) = m.loss_and_gradients(ids, gold_tags, steps);
    let mut out = Vec::with_capacity(m.params.len());
    for b in 0..m.params.len() {
        let len = m.params[b].data.len();
        let stride = len.div_ceil(max_per_block.max(1)).max(1);
        let (mut diff, mut na, mut nn) = (0.0, 0.0, 0.0);
        let mut coordinates = 0;
        for i in (0..len).step_by(stride) {
            let orig = m.params[b].data[i];
            m.params[b].data[i] = orig + h;
            let up = loss(&m);
            m.params[b].data[i] = orig - h;
            let down = loss(&m);
            m.params[b].data[i] = orig;
            let num = (up - down) / (2.0 * h);
            let a = grads[b].data[i];
            diff += (a - num) * (a - num);
            na += a * a;
            nn += num * num;
            coordinates += 1;
        }
        let denom = na.sqrt().max(nn.sqrt());
        out.push(BlockCheck {
            name: m.params[b].name.clone(),
            coordinates,
            relative_error: if denom == 0.0 { 0.0 } else { diff.sqrt() / denom },
        });
    }
    out
}
