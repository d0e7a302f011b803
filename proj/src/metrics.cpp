#include "msairway/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace msairway {

namespace {

struct Counts {
  std::size_t pred = 0;
  std::size_t gt = 0;
  std::size_t both = 0;
  std::size_t total = 0;
};

Counts count(std::span<const std::uint8_t> p, std::span<const std::uint8_t> g) {
  Counts c;
  c.total = p.size();
  for (std::size_t i = 0; i < p.size(); ++i) {
    c.pred += p[i];
    c.gt += g[i];
    c.both += p[i] & g[i];
  }
  return c;
}

Counts count(const Mask3D& pred, const Mask3D& gt) {
  if (pred.shape() != gt.shape()) {
    throw ShapeError("prediction shape " + to_string(pred.shape()) +
                     " does not match ground truth " + to_string(gt.shape()));
  }
  return count(pred.values(), gt.values());
}

double dsc_of(const Counts& c) {
  if (c.pred + c.gt == 0) return 100.0;
  return 100.0 * 2.0 * static_cast<double>(c.both) / static_cast<double>(c.pred + c.gt);
}

double tpr_of(const Counts& c) {
  if (c.gt == 0) throw UndefinedMetricError("true positive rate is undefined for empty ground truth");
  return 100.0 * static_cast<double>(c.both) / static_cast<double>(c.gt);
}

double fpr_of(const Counts& c) {
  const auto negatives = c.total - c.gt;
  if (negatives == 0) return 0.0;
  return 100.0 * static_cast<double>(c.pred - c.both) / static_cast<double>(negatives);
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

}  // namespace

double dsc(const Mask3D& pred, const Mask3D& gt) { return dsc_of(count(pred, gt)); }
double tpr(const Mask3D& pred, const Mask3D& gt) { return tpr_of(count(pred, gt)); }
double fpr(const Mask3D& pred, const Mask3D& gt) { return fpr_of(count(pred, gt)); }

double dsc_per_slice(const Mask3D& pred, const Mask3D& gt) {
  count(pred, gt);  // shape check
  const auto n = pred.shape().ny * pred.shape().nx;
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t z = 0; z < pred.shape().nz; ++z) {
    const auto c = count(pred.values().subspan(z * n, n), gt.values().subspan(z * n, n));
    if (c.pred + c.gt == 0) continue;
    sum += dsc_of(c);
    ++used;
  }
  return used == 0 ? 100.0 : sum / static_cast<double>(used);
}

OverlapScores score(const Mask3D& pred, const Mask3D& gt) {
  const auto c = count(pred, gt);
  return {dsc_of(c), c.gt == 0 ? 0.0 : tpr_of(c), fpr_of(c)};
}

RowSummary summarize(std::span<const double> values) {
  RowSummary s;
  if (values.empty()) return s;
  const auto n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

GainTable gain_table(std::span<const StrategyRow> rows, const std::string& baseline) {
  auto base = std::find_if(rows.begin(), rows.end(),
                           [&](const StrategyRow& r) { return r.strategy == baseline; });
  if (base == rows.end()) throw ValidationError("baseline strategy " + baseline + " not present");

  GainTable g;
  g.baseline = baseline;
  g.cases = base->cases;
  for (const auto& r : rows) {
    if (r.values.size() != r.cases.size()) {
      throw ShapeError("strategy " + r.strategy + " lists " + std::to_string(r.cases.size()) +
                       " cases but " + std::to_string(r.values.size()) + " values");
    }
    if (r.cases != base->cases) {
      throw ValidationError("strategy " + r.strategy + " covers a different case set than " +
                            baseline);
    }
    if (r.strategy == baseline) continue;
    StrategyRow gain{r.strategy, r.cases, {}};
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      gain.values.push_back(r.values[i] - base->values[i]);
    }
    g.rows.push_back(std::move(gain));
  }
  return g;
}

std::string table_csv(std::span<const StrategyRow> rows, std::span<const std::string> cases) {
  std::ostringstream out;
  out << "strategy";
  for (const auto& c : cases) out << ',' << c;
  out << ",Average,SD\n";
  if (cases.empty()) return out.str();
  for (const auto& r : rows) {
    out << r.strategy;
    for (double v : r.values) out << ',' << fixed2(v);
    const auto s = summarize(r.values);
    out << ',' << fixed2(s.mean) << ',' << fixed2(s.sd) << '\n';
  }
  return out.str();
}

std::string table_text(const std::string& title, std::span<const StrategyRow> rows,
                       std::span<const std::string> cases) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> head{title};
  head.insert(head.end(), cases.begin(), cases.end());
  head.emplace_back("Average ± SD");
  cells.push_back(head);
  for (const auto& r : rows) {
    std::vector<std::string> line{r.strategy};
    for (double v : r.values) line.push_back(fixed2(v));
    const auto s = summarize(r.values);
    line.push_back(fixed2(s.mean) + " ± " + fixed2(s.sd));
    cells.push_back(std::move(line));
  }

  // "±" is two bytes but one column wide.
  auto width = [](const std::string& s) {
    return s.size() - static_cast<std::size_t>(std::count(s.begin(), s.end(), '\xC2'));
  };
  std::vector<std::size_t> widths(head.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size() && i < widths.size(); ++i) {
      widths[i] = std::max(widths[i], width(line[i]));
    }
  }
  std::ostringstream out;
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (i) out << "  ";
      out << line[i];
      if (i + 1 < line.size()) out << std::string(widths[i] - width(line[i]), ' ');
    }
    out << '\n';
  }
  return out.str();
}

std::vector<StrategyRow> parse_table_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ss(l);
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      f.push_back(cell);
    }
    return f;
  };

  if (!std::getline(in, line)) throw FormatError("empty score table");
  auto head = split(line);
  if (head.empty() || head[0] != "strategy") {
    throw FormatError("score table must start with a 'strategy' column");
  }
  std::vector<std::string> cases;
  for (std::size_t i = 1; i < head.size(); ++i) {
    if (head[i] == "Average" || head[i] == "SD") break;
    cases.push_back(head[i]);
  }

  std::vector<StrategyRow> rows;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \r\t") == std::string::npos) continue;
    auto f = split(line);
    if (f.size() < cases.size() + 1) {
      throw FormatError("row '" + f[0] + "' has fewer cells than cases");
    }
    StrategyRow r{f[0], cases, {}};
    for (std::size_t i = 0; i < cases.size(); ++i) {
      try {
        std::size_t used = 0;
        r.values.push_back(std::stod(f[i + 1], &used));
        if (used != f[i + 1].size()) throw std::invalid_argument(f[i + 1]);
      } catch (const std::exception&) {
        throw FormatError("bad number '" + f[i + 1] + "' in row " + f[0]);
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write report " + path.string());
  out << text;
  if (!out) throw InputError("write failed for " + path.string());
}

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const std::string& s) {
  return prefix.parent_path() / (prefix.filename().string() + s);
}

}  // namespace

void emit_report(std::span<const StrategyRow> scores, const GainTable& gains,
                 const std::filesystem::path& prefix) {
  const std::vector<std::string> cases =
      scores.empty() ? std::vector<std::string>{} : scores.front().cases;
  write_text(with_suffix(prefix, "_scores.csv"), table_csv(scores, cases));
  write_text(with_suffix(prefix, "_scores.txt"), table_text("DSC", scores, cases));
  if (!gains.rows.empty()) {
    write_text(with_suffix(prefix, "_gains.csv"), table_csv(gains.rows, gains.cases));
    write_text(with_suffix(prefix, "_gains.txt"), table_text("Gain", gains.rows, gains.cases));
  }
}

}  // namespace msairway
