#include "loralab/csv.hpp"

#include <charconv>

namespace loralab {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

void write_record(std::ostream& out, const StepRecord& rec) {
    out << rec.step << ',' << format_double(rec.norm_a) << ',' << format_double(rec.norm_b) << ','
        << format_double(rec.rms_delta1) << ',' << format_double(rec.rms_delta2) << ','
        << format_double(rec.rms_delta3) << ',' << format_double(rec.rms_delta_y) << ','
        << format_double(rec.rms_gaz) << ',' << format_double(rec.loss) << ','
        << (rec.shrink_active ? "true" : "false") << '\n';
}

constexpr const char* kTrajectoryHeader =
    "step,norm_a,norm_b,rms_delta1,rms_delta2,rms_delta3,rms_delta_y,rms_gaz,loss,shrink_active";

}  // namespace

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log) {
    out << kTrajectoryHeader << '\n';
    for (const StepRecord& rec : log.records) {
        write_record(out, rec);
    }
    if (log.diverged_at) {
        out << "# DIVERGED at step " << *log.diverged_at << '\n';
    }
}

void write_slopes_csv(std::ostream& out, const SweepResult& result) {
    out << "quantity,measure_step,slope,intercept,r_squared,n_points,n_excluded_zeros\n";
    for (const SweepCell& cell : result.cells) {
        out << cell.quantity << ',' << cell.measure_step << ',';
        if (cell.fit) {
            out << format_double(cell.fit->slope) << ',' << format_double(cell.fit->intercept)
                << ',' << format_double(cell.fit->r_squared);
        } else {
            out << "nan,nan,nan";
        }
        out << ',' << cell.n_points << ',' << cell.n_excluded_zeros << '\n';
    }
}

void write_dynamics_csv(std::ostream& out, const Fig2Result& result) {
    out << "arm," << kTrajectoryHeader << '\n';
    for (const StepRecord& rec : result.adamw.records) {
        out << "adamw,";
        write_record(out, rec);
    }
    for (const StepRecord& rec : result.stable.records) {
        out << "stable,";
        write_record(out, rec);
    }
}

}  // namespace loralab
