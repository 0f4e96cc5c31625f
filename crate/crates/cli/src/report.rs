//! Text blocks printed after a run.

use std::fmt::Write;

use nonsep_core::engine::{LearnResult, StageStats, Stats};

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn solution_block(res: &LearnResult) -> String {
    let mut out = String::from("********** SOLUTION **********\n");
    if res.best.is_empty() {
        out.push_str("NO SOLUTION\n");
    } else {
        let _ = writeln!(
            out,
            "Precision:{:.2} Recall:{:.2} TP:{} FN:{} TN:{} FP:{} Size:{}",
            ratio(res.tp, res.tp + res.fp),
            ratio(res.tp, res.tp + res.fn_),
            res.tp,
            res.fn_,
            res.tn,
            res.fp,
            res.cost
        );
        let _ = writeln!(out, "{}", res.best);
    }
    out.push_str("******************************\n");
    out
}

fn stage_line(out: &mut String, name: &str, s: &StageStats, timing: bool) {
    let _ = writeln!(out, "{name}:");
    if timing {
        let _ = writeln!(
            out,
            "    Called: {} times      Total: {:.2}    Mean: {:.3}     Max: {:.3}",
            s.calls,
            s.total.as_secs_f64(),
            s.mean().as_secs_f64(),
            s.max.as_secs_f64()
        );
    } else {
        let _ = writeln!(out, "    Called: {} times", s.calls);
    }
}

pub fn stats_block(stats: &Stats, timing: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Num. programs: {}", stats.programs_tested);
    stage_line(&mut out, "Generate", &stats.generate, timing);
    stage_line(&mut out, "Test", &stats.test, timing);
    stage_line(&mut out, "Combine", &stats.combine, timing);
    stage_line(&mut out, "Constrain", &stats.constrain, timing);
    if timing {
        let total = stats.generate.total + stats.test.total + stats.combine.total + stats.constrain.total;
        let _ = writeln!(out, "Total operation time: {:.2}s", total.as_secs_f64());
    }
    out
}
