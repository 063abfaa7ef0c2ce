#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "ftsynth/circuit.hpp"
#include "ftsynth/layout.hpp"

namespace ftsynth {

namespace detail {

inline std::string short_label(const std::string& name) {
  const auto open = name.find('[');
  if (open == std::string::npos) return name;
  const std::string reg = name.substr(0, open);
  const std::string idx = name.substr(open + 1, name.size() - open - 2);
  return (reg.size() <= 4 ? reg : reg.substr(0, 1)) + idx;
}

inline char glyph(InstrKind kind, bool second_operand) {
  switch (kind) {
    case InstrKind::H: return 'H';
    case InstrKind::X: return 'X';
    case InstrKind::Z: return 'Z';
    case InstrKind::S: return 'S';
    case InstrKind::Sdag: return 's';
    case InstrKind::T: return 'T';
    case InstrKind::Tdag: return 't';
    case InstrKind::PrepZ: return 'P';
    case InstrKind::PrepX: return 'p';
    case InstrKind::MeasZ: return 'M';
    case InstrKind::MeasX: return 'm';
    case InstrKind::CNOT: return second_operand ? '+' : 'C';
    case InstrKind::SWAP: return 'x';
    default: return '?';
  }
}

struct StepMarks {
  std::vector<char> glyphs;  // per cell, 0 when idle
  explicit StepMarks(int cells) : glyphs(cells, 0) {}
};

}  // namespace detail

/// One ASCII grid per step showing each cell's occupant at step start and
/// the glyph of the instruction applied there (swaps mark both cells), plus
/// a trailing final-mapping snapshot.
inline std::vector<std::string> render_snapshots(const Circuit& circuit) {
  const auto& layout = circuit.layout;
  std::vector<int> occupant(layout.size(), -1);
  for (size_t q = 0; q < circuit.initial_mapping.size(); ++q) {
    occupant[circuit.initial_mapping[q]] = static_cast<int>(q);
  }
  constexpr int kWidth = 8;
  auto grid = [&](const std::string& title, const detail::StepMarks* marks) {
    std::ostringstream out;
    out << title << "\n";
    const std::string rule((kWidth + 1) * layout.cols + 1, '-');
    for (int r = 0; r < layout.rows; ++r) {
      out << rule << "\n|";
      for (int c = 0; c < layout.cols; ++c) {
        const int cell = layout.index_of(r, c);
        std::string label = occupant[cell] >= 0
                                ? detail::short_label(
                                      circuit.qubit_names[occupant[cell]])
                                : std::string(".");
        const char g = marks ? marks->glyphs[cell] : 0;
        std::string body = label;
        if (g) body += std::string(" ") + g;
        if (static_cast<int>(body.size()) > kWidth) body.resize(kWidth);
        out << body << std::string(kWidth - body.size(), ' ') << "|";
      }
      out << "\n";
    }
    out << rule << "\n";
    return out.str();
  };

  std::vector<std::string> snapshots;
  for (size_t s = 0; s < circuit.steps.size(); ++s) {
    detail::StepMarks marks(layout.size());
    for (const auto& instr : circuit.steps[s]) {
      marks.glyphs[instr.p0] = detail::glyph(instr.kind, false);
      if (instr.two_cells()) {
        marks.glyphs[instr.p1] = detail::glyph(instr.kind, true);
      }
    }
    snapshots.push_back(grid("step " + std::to_string(s + 1) + " (partition " +
                                 std::to_string(circuit.step_partition[s]) + ")",
                             &marks));
    for (const auto& instr : circuit.steps[s]) {
      if (instr.kind == InstrKind::SWAP) {
        std::swap(occupant[instr.p0], occupant[instr.p1]);
      }
    }
  }
  snapshots.push_back(grid("final mapping", nullptr));
  return snapshots;
}

/// Minimal SVG rendition of one step: cells, occupant labels, instruction
/// glyphs, and a line joining the two cells of each SWAP.
inline std::vector<std::string> render_svg(const Circuit& circuit) {
  const auto& layout = circuit.layout;
  constexpr int kCell = 56;
  std::vector<int> occupant(layout.size(), -1);
  for (size_t q = 0; q < circuit.initial_mapping.size(); ++q) {
    occupant[circuit.initial_mapping[q]] = static_cast<int>(q);
  }
  auto center = [&](int cell) {
    return std::pair<int, int>{layout.col_of(cell) * kCell + kCell / 2,
                               layout.row_of(cell) * kCell + kCell / 2};
  };
  std::vector<std::string> pages;
  const size_t total = circuit.steps.size() + 1;
  for (size_t s = 0; s < total; ++s) {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
        << layout.cols * kCell << "\" height=\"" << layout.rows * kCell
        << "\">\n";
    for (int cell = 0; cell < layout.size(); ++cell) {
      const int x = layout.col_of(cell) * kCell;
      const int y = layout.row_of(cell) * kCell;
      out << "  <rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCell
          << "\" height=\"" << kCell
          << "\" fill=\"none\" stroke=\"black\"/>\n";
      if (occupant[cell] >= 0) {
        out << "  <text x=\"" << x + 4 << "\" y=\"" << y + 16
            << "\" font-size=\"11\">"
            << detail::short_label(circuit.qubit_names[occupant[cell]])
            << "</text>\n";
      }
    }
    if (s < circuit.steps.size()) {
      for (const auto& instr : circuit.steps[s]) {
        if (instr.kind == InstrKind::SWAP) {
          const auto [x1, y1] = center(instr.p0);
          const auto [x2, y2] = center(instr.p1);
          out << "  <line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2
              << "\" y2=\"" << y2 << "\" stroke=\"red\" stroke-width=\"3\"/>\n";
        }
        for (int k = 0; k < (instr.two_cells() ? 2 : 1); ++k) {
          const int cell = k == 0 ? instr.p0 : instr.p1;
          const auto [x, y] = center(cell);
          out << "  <text x=\"" << x - 4 << "\" y=\"" << y + 18
              << "\" font-size=\"14\" font-weight=\"bold\">"
              << detail::glyph(instr.kind, k == 1) << "</text>\n";
        }
      }
      for (const auto& instr : circuit.steps[s]) {
        if (instr.kind == InstrKind::SWAP) {
          std::swap(occupant[instr.p0], occupant[instr.p1]);
        }
      }
    }
    out << "</svg>\n";
    pages.push_back(out.str());
  }
  return pages;
}

}  // namespace ftsynth
