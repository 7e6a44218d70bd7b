#include "mtlaqa/experiments.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mtlaqa/errors.hpp"

namespace mtlaqa {
namespace {

using json = nlohmann::ordered_json;

std::string cell_text(const std::optional<double>& v, int precision) {
  if (!v) return "n/a";
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << *v;
  return s.str();
}

std::string slug(const TaskConfig& t) {
  std::string s = "aqa";
  if (t.classification) s += "_cls";
  if (t.captioning) s += "_caps";
  return s;
}

std::vector<std::string> ids_of(const SampleSet& set) {
  std::vector<std::string> out;
  out.reserve(set.size());
  for (const auto* s : set) out.push_back(s->sample_id);
  return out;
}

std::optional<double> final_spearman(const TrainResult& r) { return r.epochs.back().eval.spearman; }

}  // namespace

std::string ResultTable::to_csv() const {
  std::ostringstream out;
  out << corner;
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << rows[r];
    for (const auto& v : cells[r]) {
      out << ',';
      if (v) out << std::setprecision(10) << *v;
    }
    out << '\n';
  }
  return out.str();
}

std::string ResultTable::to_json() const {
  json j;
  j["title"] = title;
  j["corner"] = corner;
  j["columns"] = columns;
  j["rows"] = json::array();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    json values = json::object();
    for (std::size_t c = 0; c < columns.size(); ++c) {
      values[columns[c]] = cells[r][c] ? json(*cells[r][c]) : json(nullptr);
    }
    j["rows"].push_back({{"name", rows[r]}, {"values", values}});
  }
  return j.dump(2);
}

std::string ResultTable::to_text() const {
  std::vector<std::size_t> width(columns.size() + 1, corner.size());
  for (const auto& r : rows) width[0] = std::max(width[0], r.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    width[c + 1] = columns[c].size();
    for (const auto& row : cells) width[c + 1] = std::max(width[c + 1], cell_text(row[c], 4).size());
  }
  std::ostringstream out;
  if (!title.empty()) out << title << '\n';
  out << std::left << std::setw(static_cast<int>(width[0])) << corner;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out << "  " << std::right << std::setw(static_cast<int>(width[c + 1])) << columns[c];
  }
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << std::left << std::setw(static_cast<int>(width[0])) << rows[r];
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out << "  " << std::right << std::setw(static_cast<int>(width[c + 1])) << cell_text(cells[r][c], 4);
    }
    out << '\n';
  }
  return out.str();
}

AblationResult run_ablation(const ExperimentConfig& base, const std::vector<Architecture>& architectures,
                            const TrainData& data, const std::filesystem::path& run_root,
                            bool verbose) {
  if (architectures.empty()) throw ValidationError("ablation: no architectures");
  const std::vector<TaskConfig> arms{TaskConfig::stl(), {true, true, false}, {true, false, true},
                                     TaskConfig::all()};
  AblationResult out;
  out.train_ids = ids_of(data.train);
  out.test_ids = ids_of(data.eval.empty() ? data.train : data.eval);
  auto& t = out.table;
  t.title = "Test Spearman, STL vs MTL";
  t.corner = "tasks";
  for (const auto& arm : arms) t.rows.push_back(arm.row_name());
  for (auto a : architectures) t.columns.push_back(to_string(a));
  t.cells.assign(arms.size(), std::vector<std::optional<double>>(architectures.size()));

  for (std::size_t c = 0; c < architectures.size(); ++c) {
    for (std::size_t r = 0; r < arms.size(); ++r) {
      auto cfg = base;
      cfg.architecture = architectures[c];
      cfg.tasks = arms[r];
      RunOptions opts;
      if (!run_root.empty()) opts.run_dir = run_root / (to_string(architectures[c]) + "_" + slug(arms[r]));
      opts.verbose = verbose;
      if (verbose) std::cerr << "ablation " << t.columns[c] << " / " << t.rows[r] << '\n';
      t.cells[r][c] = final_spearman(train(cfg, data, opts));
    }
  }
  if (!run_root.empty()) {
    std::filesystem::create_directories(run_root);
    std::ofstream(run_root / "ablation.csv") << t.to_csv();
    std::ofstream(run_root / "ablation.json") << t.to_json() << '\n';
  }
  return out;
}

std::vector<std::size_t> sweep_subset(std::size_t train_size, std::size_t size, std::uint64_t seed) {
  if (size > train_size) throw ValidationError("sweep: size exceeds the train set");
  std::vector<std::size_t> order(train_size);
  for (std::size_t i = 0; i < train_size; ++i) order[i] = i;
  std::mt19937_64 rng(seed ^ 0x5157454550ULL);
  for (std::size_t i = train_size; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  order.resize(size);
  return order;
}

ResultTable run_size_sweep(const ExperimentConfig& config, const TrainData& data,
                           const std::vector<std::int64_t>& sizes,
                           const std::filesystem::path& run_root, bool verbose) {
  if (sizes.empty()) throw ValidationError("sweep: no sizes given");
  for (auto s : sizes) {
    if (s < config.batch_size) {
      throw ValidationError("sweep: size " + std::to_string(s) + " is smaller than batch_size " +
                            std::to_string(config.batch_size));
    }
    if (static_cast<std::size_t>(s) > data.train.size()) {
      throw ValidationError("sweep: size " + std::to_string(s) + " exceeds the " +
                            std::to_string(data.train.size()) + " training samples");
    }
  }
  ResultTable t;
  t.title = "Test Spearman by training-set size";
  t.corner = "tasks";
  t.rows = {"STL", "MTL"};
  for (auto s : sizes) t.columns.push_back(std::to_string(s));
  t.cells.assign(2, std::vector<std::optional<double>>(sizes.size()));

  for (std::size_t c = 0; c < sizes.size(); ++c) {
    TrainData sub = data;
    if (sub.eval.empty()) sub.eval = data.train;
    sub.train.clear();
    for (auto i : sweep_subset(data.train.size(), static_cast<std::size_t>(sizes[c]), config.seed)) {
      sub.train.push_back(data.train[i]);
    }
    for (std::size_t r = 0; r < 2; ++r) {
      auto cfg = config;
      cfg.tasks = r == 0 ? TaskConfig::stl() : TaskConfig::all();
      RunOptions opts;
      if (!run_root.empty()) {
        opts.run_dir = run_root / ("n" + t.columns[c] + "_" + (r == 0 ? "stl" : "mtl"));
      }
      opts.verbose = verbose;
      if (verbose) std::cerr << "sweep n=" << t.columns[c] << " " << t.rows[r] << '\n';
      t.cells[r][c] = final_spearman(train(cfg, sub, opts));
    }
  }
  if (!run_root.empty()) {
    std::filesystem::create_directories(run_root);
    std::ofstream(run_root / "sweep.csv") << t.to_csv();
    std::ofstream(run_root / "sweep.json") << t.to_json() << '\n';
  }
  return t;
}

}  // namespace mtlaqa
