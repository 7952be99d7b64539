#include "hapticdrone/confusion.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "hapticdrone/errors.hpp"

namespace hapticdrone::eval {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string shape_label(std::string_view original_label) {
  return std::string(original_label.substr(0, original_label.find('/')));
}

}  // namespace

double ConfusionMatrix::diagonal_mean() const {
  if (rows.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) sum += rows[i][i];
  return sum / static_cast<double>(rows.size());
}

void ConfusionMatrix::validate(double tol) const {
  const std::size_t n = labels.size();
  if (n == 0) throw InputError("confusion matrix has no labels");
  if (rows.size() != n) {
    throw InputError(fmt::format("confusion matrix has {} rows for {} labels", rows.size(), n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw InputError(fmt::format("row {} has {} entries, expected {}", i, rows[i].size(), n));
    }
    double sum = 0.0;
    for (double x : rows[i]) {
      if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
        throw InputError(fmt::format("row {} has entry {} outside [0, 1]", i, x));
      }
      sum += x;
    }
    if (std::abs(sum - 1.0) > tol + 1e-12) {
      throw InputError(fmt::format("row {} ({}) sums to {:.4f}", i, labels[i], sum));
    }
  }
}

HapticPattern parse_pattern_label(std::string_view label) {
  const std::string l = lower(label);
  const auto slash = l.find('/');
  if (slash == std::string::npos) {
    throw InputError("pattern label '" + std::string(label) + "' must look like shape/vibration");
  }
  std::string shape = l.substr(0, slash);
  if (shape == "square") shape = "cube";
  if (shape == "circle") shape = "sphere";
  try {
    return {shape_from_string(shape), vibration_from_string(l.substr(slash + 1))};
  } catch (const ParseError& e) {
    throw InputError("pattern label '" + std::string(label) + "': " + e.what());
  }
}

ConfusionAggregate aggregate_confusion(const ConfusionMatrix& full) {
  full.validate();
  if (full.size() != 9) throw InputError("expected a 9x9 (shape, vibration) confusion matrix");

  std::vector<HapticPattern> patterns;
  for (const auto& l : full.labels) {
    const auto p = parse_pattern_label(l);
    if (std::find(patterns.begin(), patterns.end(), p) != patterns.end()) {
      throw InputError("duplicate pattern label '" + l + "'");
    }
    patterns.push_back(p);
  }

  std::vector<Shape> shapes;
  std::vector<std::string> shape_names;
  std::vector<VibrationLevel> levels;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    if (std::find(shapes.begin(), shapes.end(), patterns[i].shape) == shapes.end()) {
      shapes.push_back(patterns[i].shape);
      shape_names.push_back(shape_label(full.labels[i]));
    }
    if (std::find(levels.begin(), levels.end(), patterns[i].vibration) == levels.end()) {
      levels.push_back(patterns[i].vibration);
    }
  }
  // Nine distinct pairs over at most three values per axis: all combinations present.
  const auto index_of = [&](Shape s, VibrationLevel v) {
    for (std::size_t i = 0; i < patterns.size(); ++i) {
      if (patterns[i].shape == s && patterns[i].vibration == v) return i;
    }
    throw InputError("missing pattern label");
  };

  ConfusionAggregate out;
  out.shape.labels = shape_names;
  out.shape.rows.assign(3, std::vector<double>(3, 0.0));
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t p = 0; p < 3; ++p) {
      double total = 0.0;
      for (VibrationLevel v : levels) {
        for (VibrationLevel vp : levels) {
          total += full.rows[index_of(shapes[a], v)][index_of(shapes[p], vp)];
        }
      }
      out.shape.rows[a][p] = total / 3.0;
    }
  }

  for (VibrationLevel v : levels) out.vibration.labels.emplace_back(to_string(v));
  out.vibration.rows.assign(3, std::vector<double>(3, 0.0));
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t p = 0; p < 3; ++p) {
      double total = 0.0;
      for (Shape s : shapes) {
        for (Shape sp : shapes) total += full.rows[index_of(s, levels[a])][index_of(sp, levels[p])];
      }
      out.vibration.rows[a][p] = total / 3.0;
    }
  }

  out.full_diagonal_mean = full.diagonal_mean();
  out.shape_diagonal_mean = out.shape.diagonal_mean();
  out.vibration_diagonal_mean = out.vibration.diagonal_mean();
  return out;
}

ConfusionMatrix parse_confusion(std::string_view text) {
  using nlohmann::json;
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw InputError("confusion file is not a JSON object");
  ConfusionMatrix m;
  try {
    for (const auto& l : j.at("labels")) m.labels.push_back(l.get<std::string>());
    for (const auto& row : j.at("rows")) {
      std::vector<double> r;
      for (const auto& x : row) {
        if (x.is_null() || (x.is_string() && x.get<std::string>() == "-")) {
          r.push_back(0.0);
        } else {
          r.push_back(x.get<double>());
        }
      }
      m.rows.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed confusion file: ") + e.what());
  }
  return m;
}

ConfusionMatrix load_confusion(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_confusion(ss.str());
}

std::string format_matrix(const ConfusionMatrix& m) {
  std::size_t width = 6;
  for (const auto& l : m.labels) width = std::max(width, l.size() + 1);
  std::string out = fmt::format("{:<{}}", "", width);
  for (const auto& l : m.labels) out += fmt::format("{:>{}}", l, width);
  out += '\n';
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    out += fmt::format("{:<{}}", m.labels[i], width);
    for (double x : m.rows[i]) out += fmt::format("{:>{}.2f}", x, width);
    out += '\n';
  }
  return out;
}

}  // namespace hapticdrone::eval
