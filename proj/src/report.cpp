#include "denoise_bench/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

namespace denoise_bench {

namespace fs = std::filesystem;

namespace {

std::string number(double v) { return fmt::format("{:.6g}", v); }

std::string field(const std::string &s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

std::vector<std::string> split_row(std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                current += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                current += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    if (quoted) throw CsvSchemaError(fmt::format("line {}: unterminated quote", line_no));
    fields.push_back(std::move(current));
    return fields;
}

double parse_double(const std::string &s, std::size_t line_no, std::string_view column) {
    double v = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) {
        throw CsvSchemaError(fmt::format("line {}: bad number '{}' in column {}", line_no, s, column));
    }
    return v;
}

std::vector<EvaluationRecord> sorted_records(std::span<const EvaluationRecord> records) {
    std::vector<EvaluationRecord> sorted(records.begin(), records.end());
    std::ranges::stable_sort(sorted, [](const EvaluationRecord &a, const EvaluationRecord &b) {
        return std::tie(a.dataset, a.method, a.image_id) < std::tie(b.dataset, b.method, b.image_id);
    });
    return sorted;
}

}  // namespace

std::string format_csv(std::span<const EvaluationRecord> records) {
    std::string out(csv_header);
    out += '\n';
    for (const auto &r : sorted_records(records)) {
        out += fmt::format("{},{},{},{},{},{},{}\n", field(r.method), field(r.dataset), field(r.image_id),
                           number(r.psnr_db), number(r.ssim), number(r.wall_time_s), field(r.output_path));
    }
    return out;
}

void emit_csv(std::span<const EvaluationRecord> records, const fs::path &path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << format_csv(records);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<EvaluationRecord> parse_csv(std::string_view text) {
    std::vector<EvaluationRecord> records;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        const auto fields = split_row(line, line_no);
        if (!header_seen) {
            const auto expected = split_row(csv_header, 0);
            if (fields != expected) {
                for (const auto &f : fields) {
                    if (std::ranges::find(expected, f) == expected.end()) {
                        throw CsvSchemaError(fmt::format("unknown column '{}'", f));
                    }
                }
                throw CsvSchemaError(fmt::format("expected header '{}'", csv_header));
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 7) {
            throw CsvSchemaError(fmt::format("line {}: expected 7 fields, got {}", line_no, fields.size()));
        }
        EvaluationRecord r;
        r.method = fields[0];
        r.dataset = fields[1];
        r.image_id = fields[2];
        r.psnr_db = parse_double(fields[3], line_no, "psnr_db");
        r.ssim = parse_double(fields[4], line_no, "ssim");
        r.wall_time_s = parse_double(fields[5], line_no, "wall_time_s");
        r.output_path = fields[6];
        records.push_back(std::move(r));
    }
    if (!header_seen) throw CsvSchemaError("missing header");
    return records;
}

std::vector<EvaluationRecord> read_csv(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

void emit_timing_csv(std::span<const MethodTiming> timings, const fs::path &path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "method,median_s,repeats\n";
    for (const auto &t : timings) {
        out << fmt::format("{},{},{}\n", field(t.method), number(t.timing.median_s), t.timing.samples_s.size());
    }
}

const SummaryCell *Summary::cell(const std::string &dataset, const std::string &method) const {
    auto it = std::ranges::find_if(cells, [&](const SummaryCell &c) { return c.dataset == dataset && c.method == method; });
    return it == cells.end() ? nullptr : &*it;
}

Summary emit_summary(std::span<const EvaluationRecord> records) {
    std::map<std::pair<std::string, std::string>, std::vector<const EvaluationRecord *>> groups;
    for (const auto &r : records) groups[{r.dataset, r.method}].push_back(&r);

    Summary s;
    for (const auto &[key, rows] : groups) {
        const auto &[dataset, method] = key;
        if (s.datasets.empty() || s.datasets.back() != dataset) s.datasets.push_back(dataset);
        s.methods.push_back(method);

        SummaryCell c;
        c.dataset = dataset;
        c.method = method;
        c.count = rows.size();
        std::vector<double> finite;
        double ssim_sum = 0.0, time_sum = 0.0;
        for (const auto *r : rows) {
            if (std::isfinite(r->psnr_db)) {
                finite.push_back(r->psnr_db);
            } else if (r->psnr_db > 0) {
                ++c.infinite_psnr;
            }
            ssim_sum += r->ssim;
            time_sum += r->wall_time_s;
        }
        if (!finite.empty()) {
            c.psnr_stats = aggregate(finite);
            c.mean_psnr = c.psnr_stats->mean;
        } else {
            c.mean_psnr = c.infinite_psnr ? psnr_infinite : std::nan("");
        }
        c.mean_ssim = ssim_sum / double(rows.size());
        c.mean_wall_time_s = time_sum / double(rows.size());
        s.cells.push_back(std::move(c));
    }
    std::ranges::sort(s.methods);
    s.methods.erase(std::unique(s.methods.begin(), s.methods.end()), s.methods.end());

    for (const auto &dataset : s.datasets) {
        double best_psnr = -psnr_infinite, best_ssim = -psnr_infinite;
        for (const auto &c : s.cells) {
            if (c.dataset != dataset) continue;
            if (c.mean_psnr > best_psnr) best_psnr = c.mean_psnr;
            if (c.mean_ssim > best_ssim) best_ssim = c.mean_ssim;
        }
        for (auto &c : s.cells) {
            if (c.dataset != dataset) continue;
            c.best_psnr = c.mean_psnr == best_psnr;
            c.best_ssim = c.mean_ssim == best_ssim;
        }
        s.rankings.push_back(rank_methods(records, dataset));
    }

    const std::size_t n = s.datasets.size();
    s.tau.assign(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            auto restrict_to = [](const MethodRanking &r, const MethodRanking &other) {
                MethodRanking out{r.noise_regime, {}, {}};
                for (std::size_t k = 0; k < r.ordered_methods.size(); ++k) {
                    if (std::ranges::find(other.ordered_methods, r.ordered_methods[k]) != other.ordered_methods.end()) {
                        out.ordered_methods.push_back(r.ordered_methods[k]);
                        out.scores.push_back(r.scores[k]);
                    }
                }
                return out;
            };
            s.tau[i][j] = kendall_tau(restrict_to(s.rankings[i], s.rankings[j]), restrict_to(s.rankings[j], s.rankings[i]));
        }
    }
    return s;
}

namespace {

std::size_t column_width(const std::vector<std::string> &names, std::size_t min) {
    std::size_t w = min;
    for (const auto &n : names) w = std::max(w, n.size());
    return w + 2;
}

}  // namespace

std::string render_summary(const Summary &s, SummarySections sections) {
    std::string out;
    const std::size_t dw = column_width(s.datasets, 7);
    const std::size_t mw = column_width(s.methods, 9);

    auto table = [&](const std::string &title, auto &&value) {
        out += fmt::format("== {} ==\n{:<{}}", title, "dataset", dw);
        for (const auto &m : s.methods) out += fmt::format("{:>{}}", m, mw);
        out += '\n';
        for (const auto &d : s.datasets) {
            out += fmt::format("{:<{}}", d, dw);
            for (const auto &m : s.methods) {
                const SummaryCell *c = s.cell(d, m);
                out += fmt::format("{:>{}}", c ? value(*c) : std::string("-"), mw);
            }
            out += '\n';
        }
        out += '\n';
    };

    table("Mean PSNR (dB), * = best", [](const SummaryCell &c) {
        return fmt::format("{:.2f}{}", c.mean_psnr, c.best_psnr ? "*" : " ");
    });
    table("Mean SSIM, * = best", [](const SummaryCell &c) {
        return fmt::format("{:.4f}{}", c.mean_ssim, c.best_ssim ? "*" : " ");
    });
    table("Mean wall time (s)", [](const SummaryCell &c) { return fmt::format("{:.4g}", c.mean_wall_time_s); });

    out += "== PSNR distribution (dB) ==\n";
    out += fmt::format("{:<{}}{:<{}}{:>7}{:>6}{:>9}{:>9}{:>9}{:>9}{:>9}{:>9}\n", "dataset", dw, "method", mw, "count",
                       "inf", "mean", "p10", "p25", "median", "p75", "p90");
    for (const auto &c : s.cells) {
        out += fmt::format("{:<{}}{:<{}}{:>7}{:>6}", c.dataset, dw, c.method, mw, c.count, c.infinite_psnr);
        if (c.psnr_stats) {
            const auto &a = *c.psnr_stats;
            out += fmt::format("{:>9.2f}{:>9.2f}{:>9.2f}{:>9.2f}{:>9.2f}{:>9.2f}\n", a.mean, a.p10, a.p25, a.median,
                               a.p75, a.p90);
        } else {
            out += fmt::format("{:>9}\n", "n/a");
        }
    }
    out += '\n';

    if (sections.rankings) {
        out += "== Ranking by mean PSNR ==\n";
        for (const auto &r : s.rankings) {
            out += fmt::format("{:<{}}", r.noise_regime, dw);
            for (std::size_t i = 0; i < r.ordered_methods.size(); ++i) {
                out += fmt::format("{}{} ({:.2f})", i ? " > " : "", r.ordered_methods[i], r.scores[i]);
            }
            out += '\n';
        }
        out += '\n';
    }

    if (sections.tau) {
        out += "== Kendall tau-b between dataset rankings ==\n";
        out += fmt::format("{:<{}}", "", dw);
        for (const auto &d : s.datasets) out += fmt::format("{:>{}}", d, dw);
        out += '\n';
        for (std::size_t i = 0; i < s.datasets.size(); ++i) {
            out += fmt::format("{:<{}}", s.datasets[i], dw);
            for (std::size_t j = 0; j < s.datasets.size(); ++j) out += fmt::format("{:>{}.3f}", s.tau[i][j], dw);
            out += '\n';
        }
        out += '\n';
    }
    return out;
}

}  // namespace denoise_bench
