#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

#include "ftsynth/ir.hpp"

namespace ftsynth {

struct ParseError : std::runtime_error {
  int line;
  int col;
  ParseError(int line, int col, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ":" +
                           std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
};

namespace detail {

struct Token {
  enum class Kind { ident, number, punct, end };
  Kind kind = Kind::end;
  std::string text;
  int line = 0;
  int col = 0;
};

class Lexer {
public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_ws_and_comments();
    Token tok;
    tok.line = line_;
    tok.col = col_;
    if (pos_ >= text_.size()) {
      tok.kind = Token::Kind::end;
      return tok;
    }
    const char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      tok.kind = Token::Kind::ident;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_')) {
        tok.text += advance();
      }
      return tok;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      tok.kind = Token::Kind::number;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        tok.text += advance();
      }
      return tok;
    }
    tok.kind = Token::Kind::punct;
    tok.text = std::string(1, advance());
    return tok;
  }

private:
  char advance() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_ws_and_comments() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct GateInfo {
  InstrKind kind;
  int arity;
};

inline const std::unordered_map<std::string, GateInfo>& gate_table() {
  static const std::unordered_map<std::string, GateInfo> table = {
      {"prepz", {InstrKind::PrepZ, 1}}, {"prepx", {InstrKind::PrepX, 1}},
      {"measz", {InstrKind::MeasZ, 1}}, {"measx", {InstrKind::MeasX, 1}},
      {"h", {InstrKind::H, 1}},         {"x", {InstrKind::X, 1}},
      {"z", {InstrKind::Z, 1}},         {"s", {InstrKind::S, 1}},
      {"sdg", {InstrKind::Sdag, 1}},    {"t", {InstrKind::T, 1}},
      {"tdg", {InstrKind::Tdag, 1}},    {"cx", {InstrKind::CNOT, 2}},
      {"swap", {InstrKind::SWAP, 2}},
  };
  return table;
}

inline Role parse_role(const Token& tok) {
  if (tok.text == "data") return Role::data;
  if (tok.text == "ancilla" || tok.text == "syndrome") return Role::ancilla;
  if (tok.text == "checkup") return Role::checkup;
  if (tok.text == "magic") return Role::magic;
  if (tok.text == "dummy") return Role::dummy;
  throw ParseError(tok.line, tok.col, "unknown role '" + tok.text + "'");
}

class ProtocolParser {
public:
  ProtocolParser(std::string_view text, std::string_view default_name)
      : lexer_(text) {
    protocol_.name = std::string(default_name);
    cur_ = lexer_.next();
  }

  Protocol run() {
    while (cur_.kind != Token::Kind::end) {
      statement();
    }
    return std::move(protocol_);
  }

private:
  void statement() {
    const Token head = expect_ident("statement");
    if (head.text == "protocol") {
      protocol_.name = expect_ident("protocol name").text;
    } else if (head.text == "distance") {
      protocol_.code_distance = expect_number("code distance");
      if (protocol_.code_distance < 1) {
        throw ParseError(head.line, head.col, "code distance must be >= 1");
      }
    } else if (head.text == "qreg") {
      qreg();
    } else if (head.text == "barrier") {
      protocol_.instructions.push_back(Instruction::barrier());
    } else if (head.text == "move") {
      move();
    } else {
      gate(head);
    }
    expect_punct(";");
  }

  void qreg() {
    const Token name = expect_ident("register name");
    expect_punct("[");
    const int size = expect_number("register size");
    expect_punct("]");
    if (size < 1) {
      throw ParseError(name.line, name.col, "register size must be >= 1");
    }
    const Token key = expect_ident("'role'");
    if (key.text != "role") {
      throw ParseError(key.line, key.col, "expected 'role=...' after register");
    }
    expect_punct("=");
    const Role role = parse_role(expect_ident("role"));
    bool encoded = false;
    if (cur_.kind == Token::Kind::ident && cur_.text == "encoded") {
      encoded = true;
      consume();
    }
    try {
      protocol_.add_register(name.text, size, role, encoded);
    } catch (const std::invalid_argument& e) {
      throw ParseError(name.line, name.col, e.what());
    }
  }

  void move() {
    const int q = qubit();
    Destination dest;
    if (cur_.kind == Token::Kind::number) {
      dest = Destination::concrete(expect_number("destination cell"));
    } else if (cur_.kind == Token::Kind::ident &&
               (cur_.text == "init" || cur_.text == "anchor")) {
      const bool is_init = cur_.text == "init";
      consume();
      expect_punct("(");
      const int ref = qubit();
      expect_punct(")");
      dest = is_init ? Destination::init(ref) : Destination::anchor(ref);
    } else {
      throw ParseError(cur_.line, cur_.col,
                       "malformed move destination; expected a cell index, "
                       "init(q) or anchor(q)");
    }
    protocol_.instructions.push_back(Instruction::move(q, dest));
  }

  void gate(const Token& head) {
    const auto& table = gate_table();
    auto it = table.find(head.text);
    if (it == table.end()) {
      throw ParseError(head.line, head.col, "unknown gate '" + head.text + "'");
    }
    const int q0 = qubit();
    if (it->second.arity == 1) {
      if (cur_.kind == Token::Kind::punct && cur_.text == ",") {
        throw ParseError(cur_.line, cur_.col,
                         "'" + head.text + "' takes exactly one operand");
      }
      protocol_.instructions.push_back(Instruction::gate1(it->second.kind, q0));
      return;
    }
    expect_punct(",");
    const Token second = cur_;
    const int q1 = qubit();
    if (q0 == q1) {
      throw ParseError(second.line, second.col,
                       "'" + head.text + "' operands must be distinct");
    }
    protocol_.instructions.push_back(Instruction::gate2(it->second.kind, q0, q1));
  }

  int qubit() {
    const Token name = expect_ident("qubit reference");
    expect_punct("[");
    const int index = expect_number("qubit index");
    expect_punct("]");
    for (const auto& reg : protocol_.registers) {
      if (reg.name != name.text) continue;
      if (index >= reg.size) {
        throw ParseError(name.line, name.col,
                         "index " + std::to_string(index) + " out of range for " +
                             reg.name + "[" + std::to_string(reg.size) + "]");
      }
      return reg.first_id + index;
    }
    throw ParseError(name.line, name.col, "undeclared qubit '" + name.text + "'");
  }

  Token expect_ident(const std::string& what) {
    if (cur_.kind != Token::Kind::ident) {
      throw ParseError(cur_.line, cur_.col, "expected " + what);
    }
    Token tok = cur_;
    consume();
    return tok;
  }

  int expect_number(const std::string& what) {
    if (cur_.kind != Token::Kind::number) {
      throw ParseError(cur_.line, cur_.col, "expected " + what);
    }
    const int value = std::stoi(cur_.text);
    consume();
    return value;
  }

  void expect_punct(const std::string& text) {
    if (cur_.kind != Token::Kind::punct || cur_.text != text) {
      throw ParseError(cur_.line, cur_.col, "expected '" + text + "'");
    }
    consume();
  }

  void consume() { cur_ = lexer_.next(); }

  Lexer lexer_;
  Token cur_;
  Protocol protocol_;
};

}  // namespace detail

inline Protocol parse_protocol(std::string_view text,
                               std::string_view default_name = "protocol") {
  return detail::ProtocolParser(text, default_name).run();
}

inline std::string print_protocol(const Protocol& protocol) {
  std::ostringstream out;
  out << "protocol " << protocol.name << ";\n";
  out << "distance " << protocol.code_distance << ";\n";
  for (const auto& reg : protocol.registers) {
    out << "qreg " << reg.name << "[" << reg.size << "] role="
        << role_name(reg.role) << (reg.encoded_input ? " encoded" : "") << ";\n";
  }
  for (const auto& instr : protocol.instructions) {
    switch (instr.kind) {
      case InstrKind::Barrier:
        out << "barrier;\n";
        break;
      case InstrKind::Move:
        out << "move " << protocol.qubit_names[instr.q0] << " ";
        switch (instr.dest.kind) {
          case Destination::Kind::concrete:
            out << instr.dest.cell;
            break;
          case Destination::Kind::init:
            out << "init(" << protocol.qubit_names[instr.dest.qubit] << ")";
            break;
          case Destination::Kind::anchor:
            out << "anchor(" << protocol.qubit_names[instr.dest.qubit] << ")";
            break;
          case Destination::Kind::none:
            out << "?";
            break;
        }
        out << ";\n";
        break;
      default:
        out << mnemonic(instr.kind) << " " << protocol.qubit_names[instr.q0];
        if (instr.q1 >= 0) out << ", " << protocol.qubit_names[instr.q1];
        out << ";\n";
        break;
    }
  }
  return out.str();
}

inline Protocol load_protocol(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open protocol file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string name = path;
  if (auto slash = name.find_last_of('/'); slash != std::string::npos) {
    name = name.substr(slash + 1);
  }
  if (auto dot = name.find_last_of('.'); dot != std::string::npos) {
    name = name.substr(0, dot);
  }
  return parse_protocol(buf.str(), name);
}

}  // namespace ftsynth
