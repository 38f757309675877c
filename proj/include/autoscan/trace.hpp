#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "autoscan/config.hpp"
#include "autoscan/grid.hpp"

namespace autoscan {

struct TraceEvent {
  double t = 0.0;
  std::string kind;
  int robot = -1;  // -1 = task center
  nlohmann::json data;
};

/// Append-only JSONL event log. nlohmann objects serialize with sorted keys
/// and shortest-round-trip numbers, so identical runs produce byte-identical
/// files.
class TraceWriter {
 public:
  TraceWriter() = default;
  explicit TraceWriter(const std::string& path) : out_(path), enabled_(true) {
    if (!out_) throw std::runtime_error("cannot write trace file: " + path);
  }

  void emit(double t, const std::string& kind, int robot,
            nlohmann::json data = nlohmann::json::object()) {
    if (!enabled_) return;
    nlohmann::json line{
        {"t", t}, {"kind", kind}, {"robot", robot}, {"data", std::move(data)}};
    out_ << line.dump() << "\n";
  }

  bool enabled() const { return enabled_; }

 private:
  std::ofstream out_;
  bool enabled_ = false;
};

inline std::vector<TraceEvent> read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file: " + path);
  std::vector<TraceEvent> events;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("invalid trace line: " + std::string(e.what()));
    }
    TraceEvent e;
    e.t = j.at("t").get<double>();
    e.kind = j.at("kind").get<std::string>();
    e.robot = j.at("robot").get<int>();
    e.data = j.value("data", nlohmann::json::object());
    events.push_back(std::move(e));
  }
  return events;
}

/// Row-major run-length encoding of the belief grid, e.g. "34U6F2O...".
inline std::string encode_grid_rle(const OccupancyGrid& grid) {
  static const char symbol[3] = {'U', 'F', 'O'};
  std::string out;
  long long run = 0;
  int state = -1;
  auto flush = [&]() {
    if (run > 0) out += std::to_string(run) + symbol[state];
  };
  for (int y = 0; y < grid.height(); ++y)
    for (int x = 0; x < grid.width(); ++x) {
      int s = (int)grid.at({x, y});
      if (s == state) {
        ++run;
      } else {
        flush();
        state = s;
        run = 1;
      }
    }
  flush();
  return out;
}

inline std::vector<CellState> decode_grid_rle(const std::string& rle,
                                              std::size_t expected) {
  std::vector<CellState> cells;
  cells.reserve(expected);
  std::size_t i = 0;
  while (i < rle.size()) {
    long long run = 0;
    while (i < rle.size() && rle[i] >= '0' && rle[i] <= '9')
      run = run * 10 + (rle[i++] - '0');
    if (i >= rle.size() || run <= 0)
      throw ParseError("malformed grid run-length encoding");
    CellState s;
    switch (rle[i++]) {
      case 'U': s = CellState::Unknown; break;
      case 'F': s = CellState::Free; break;
      case 'O': s = CellState::Occupied; break;
      default: throw ParseError("malformed grid run-length encoding");
    }
    for (long long k = 0; k < run; ++k) cells.push_back(s);
  }
  if (cells.size() != expected)
    throw ParseError("grid run-length encoding has wrong cell count");
  return cells;
}

}  // namespace autoscan
