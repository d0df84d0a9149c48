use std::cmp::Ordering;

use crate::tables::{sum_covers, DyadicValue};

use super::register::IntervalRegister;

/// Per-step checks of the matching invariants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditRecord {
    pub step: u32,
    pub s: i64,
    /// `I_n < F(s_n)`.
    pub below_width: bool,
    /// `F(s_n) <= F(s_n,0) + F(s_n,1)`, a missing branch counting as zero.
    pub no_gap: bool,
    /// `F(s_n,0) >= F(s_n) / N` when the zero branch exists.
    pub ratio_ok: bool,
    /// Bit length of `floor(I_n 2^d)` at the threshold's least significant bit `2^-d`.
    pub span: Option<u32>,
    /// Window watermark so far (windowed mode only).
    pub window_span: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuditSummary {
    pub records: Vec<AuditRecord>,
    pub max_span: u32,
    pub max_window_span: u32,
    /// `log2 M + ceil(log2 N)`.
    pub span_limit: u32,
}

pub(crate) struct StepView<'a> {
    pub step: u32,
    pub s: i64,
    pub width: DyadicValue,
    pub zero_branch: Option<DyadicValue>,
    pub one_branch: Option<DyadicValue>,
    pub len: u32,
    pub counts: (u32, u32),
    pub register: &'a IntervalRegister,
}

/// Failed check name plus a dump of the state.
pub(crate) type AuditFailure = (u32, &'static str, String);

impl AuditSummary {
    pub(crate) fn new(span_limit: u32) -> Self {
        Self {
            span_limit,
            ..Self::default()
        }
    }

    pub(crate) fn record(&mut self, view: StepView<'_>) -> Result<(), AuditFailure> {
        let zero = DyadicValue {
            mantissa: 0,
            exponent: view.width.exponent,
        };
        let below_width = !view.register.at_least(view.width);
        let no_gap = sum_covers(
            view.zero_branch.unwrap_or(zero),
            view.one_branch.unwrap_or(zero),
            view.width,
        );
        let ratio_ok = view
            .zero_branch
            .is_none_or(|t| t.cmp_scaled(view.len as u64, view.width, 1) != Ordering::Less);
        let span = view.zero_branch.map(|t| view.register.span_at(t.exponent));
        let window_span = view.register.span_watermark();
        let rec = AuditRecord {
            step: view.step,
            s: view.s,
            below_width,
            no_gap,
            ratio_ok,
            span,
            window_span,
        };

        let failed = if !below_width {
            Some("residual below width")
        } else if !no_gap {
            Some("no gap")
        } else if !ratio_ok {
            Some("subtrahend ratio")
        } else if span.is_some_and(|s| s > self.span_limit) {
            Some("subtraction span")
        } else {
            None
        };
        if let Some(check) = failed {
            let dump = format!(
                "s={} counts={:?} I~{} F(s)={:?} zero={:?} one={:?} span={:?} window={:?}",
                view.s,
                view.counts,
                view.register.to_f64(),
                view.width,
                view.zero_branch,
                view.one_branch,
                span,
                view.register,
            );
            return Err((view.step, check, dump));
        }
        self.max_span = self.max_span.max(span.unwrap_or(0));
        self.max_window_span = self.max_window_span.max(window_span.unwrap_or(0));
        self.records.push(rec);
        Ok(())
    }
}
