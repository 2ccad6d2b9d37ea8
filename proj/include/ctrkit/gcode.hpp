#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ctrkit/error.hpp"
#include "ctrkit/tube.hpp"

namespace ctrkit {

// Board axes driving one tube's cart. The translation axis position is the
// cart coordinate, deployed length = cart + home_offset.
struct AxisAssignment {
  int tube = 1;
  char translation = 'X';
  char rotation = 'A';
  double steps_per_mm = 800.0;
  double steps_per_degree = 8.888;
  double home_offset = 0.0;  // mm of deployment when the cart is homed
  double translation_min = 0.0;
  double translation_max = 50.0;
  double rotation_min = -180.0;
  double rotation_max = 180.0;
};

// Location of an axis letter inside an AxisMap.
struct AxisRef {
  std::size_t index;  // into AxisMap::entries
  bool rotation;
};

class AxisMap {
 public:
  AxisMap() = default;
  explicit AxisMap(std::vector<AxisAssignment> entries) : entries_(std::move(entries)) { validate(); }

  // X/Y/Z... for translation and A/B/C... for rotation, tube order.
  static AxisMap defaults(std::size_t tube_count) {
    static constexpr std::string_view kTranslation = "XYZUVW";
    static constexpr std::string_view kRotation = "ABCDEH";
    if (tube_count > kTranslation.size()) {
      throw Error(ErrorCode::config_error, "no default axis letters for more than 6 tubes");
    }
    std::vector<AxisAssignment> entries;
    for (std::size_t k = 0; k < tube_count; ++k) {
      AxisAssignment a;
      a.tube = static_cast<int>(k) + 1;
      a.translation = kTranslation[k];
      a.rotation = kRotation[k];
      entries.push_back(a);
    }
    return AxisMap(std::move(entries));
  }

  const std::vector<AxisAssignment>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  const AxisAssignment* for_tube(int tube) const {
    for (const auto& e : entries_) {
      if (e.tube == tube) return &e;
    }
    return nullptr;
  }

  std::optional<AxisRef> find(char letter) const {
    const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(letter)));
    for (std::size_t k = 0; k < entries_.size(); ++k) {
      if (entries_[k].translation == up) return AxisRef{k, false};
      if (entries_[k].rotation == up) return AxisRef{k, true};
    }
    return std::nullopt;
  }

  // Axis letters in emit order: translation then rotation for each tube.
  std::vector<char> letters() const {
    std::vector<char> out;
    for (const auto& e : entries_) {
      out.push_back(e.translation);
      out.push_back(e.rotation);
    }
    return out;
  }

 private:
  void validate() {
    std::string seen;
    for (auto& e : entries_) {
      for (char* letter : {&e.translation, &e.rotation}) {
        *letter = static_cast<char>(std::toupper(static_cast<unsigned char>(*letter)));
        if (!std::isalpha(static_cast<unsigned char>(*letter)) || std::string_view("GMFN").find(*letter) != std::string_view::npos) {
          throw Error(ErrorCode::config_error, std::string("axis letter '") + *letter + "' is not usable");
        }
        if (seen.find(*letter) != std::string::npos) {
          throw Error(ErrorCode::config_error, std::string("axis letter '") + *letter + "' assigned twice");
        }
        seen.push_back(*letter);
      }
      if (!(e.steps_per_mm > 0.0) || !(e.steps_per_degree > 0.0)) {
        throw Error(ErrorCode::config_error, "steps ratios must be > 0");
      }
      if (!(e.translation_min < e.translation_max) || !(e.rotation_min < e.rotation_max)) {
        throw Error(ErrorCode::config_error, "axis limits must satisfy min < max");
      }
    }
  }

  std::vector<AxisAssignment> entries_;
};

enum class CommandKind { none, absolute_mode, relative_mode, linear_move, home, position_query };

struct AxisWord {
  char letter;
  double value;
  bool operator==(const AxisWord&) const = default;
};

struct GcodeCommand {
  CommandKind kind = CommandKind::none;
  std::vector<AxisWord> axis_words;
  std::optional<double> feed;

  std::optional<double> value(char letter) const {
    for (const auto& w : axis_words) {
      if (w.letter == letter) return w.value;
    }
    return std::nullopt;
  }
};

// Fixed three-decimal rendering used for every axis value on the wire.
inline std::string format_axis_value(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", value);
  std::string out(buf);
  if (out == "-0.000") out = "0.000";
  return out;
}

inline std::string format_feed(double feed) {
  if (feed == std::floor(feed) && std::abs(feed) < 1e12) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", feed);
    return buf;
  }
  return format_axis_value(feed);
}

// Axis words (in axis-map order) placing every cart at `target`.
inline std::vector<AxisWord> axis_words_for(const JointConfig& target, const AxisMap& axis_map) {
  std::vector<AxisWord> words;
  for (std::size_t k = 0; k < target.size(); ++k) {
    const auto* axes = axis_map.for_tube(static_cast<int>(k) + 1);
    if (axes == nullptr) {
      throw Error(ErrorCode::config_error, "no axis letters configured for tube " + std::to_string(k + 1));
    }
    words.push_back({axes->translation, target.translations[k] - axes->home_offset});
    words.push_back({axes->rotation, target.rotations[k]});
  }
  return words;
}

inline std::string format_axis_words(const std::vector<AxisWord>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w.letter;
    out += format_axis_value(w.value);
  }
  return out;
}

// Absolute move to `target`: "G90\nG1 <words> F<feed>\n".
inline std::string emit_move(const JointConfig& target, const AxisMap& axis_map, double feed) {
  if (target.translations.size() != target.rotations.size()) {
    throw Error(ErrorCode::invalid_input, "joint vectors differ in length");
  }
  if (!(feed > 0.0) || !std::isfinite(feed)) throw Error(ErrorCode::invalid_input, "feed must be > 0");
  std::string out = "G90\nG1 ";
  out += format_axis_words(axis_words_for(target, axis_map));
  out += " F";
  out += format_feed(feed);
  out += '\n';
  return out;
}

namespace detail {

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

}  // namespace detail

// Parses one line of the supported dialect {G90, G91, G1, G28, M114}.
// Letters are case-insensitive and text after ';' is ignored. Blank lines
// yield CommandKind::none. Throws ParseError (column is 1-based) with code
// parse_error or unsupported_command.
inline GcodeCommand parse_line(std::string_view text, const AxisMap& axis_map) {
  const std::string line(text.substr(0, text.find(';')));
  auto unsupported = [&](const std::string& what, std::size_t col) -> ParseError {
    std::string echoed(text);
    while (!echoed.empty() && detail::is_space(echoed.back())) echoed.pop_back();
    return ParseError(what + " in line: " + echoed, col, ErrorCode::unsupported_command);
  };

  struct Word {
    char letter;
    double value;
    std::string_view number;
    std::size_t column;
  };
  std::vector<Word> words;
  std::size_t i = 0;
  while (i < line.size()) {
    if (detail::is_space(line[i])) {
      ++i;
      continue;
    }
    const unsigned char lc = static_cast<unsigned char>(line[i]);
    if (!std::isalpha(lc)) {
      throw ParseError(std::string("expected a command letter, found '") + line[i] + "'", i + 1);
    }
    const char letter = static_cast<char>(std::toupper(lc));
    const std::size_t letter_col = i + 1;
    ++i;
    const std::size_t start = i;
    if (i < line.size() && (line[i] == '+' || line[i] == '-')) ++i;
    std::size_t digits = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i, ++digits;
    if (i < line.size() && line[i] == '.') {
      ++i;
      while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i, ++digits;
    }
    if (digits == 0) {
      throw ParseError(std::string("malformed number after '") + letter + "'", start + 1);
    }
    if (i < line.size() && !detail::is_space(line[i]) && !std::isalpha(static_cast<unsigned char>(line[i]))) {
      throw ParseError(std::string("malformed number after '") + letter + "'", i + 1);
    }
    std::string_view number(line.data() + start, i - start);
    std::string_view digits_view = number;
    if (!digits_view.empty() && digits_view.front() == '+') digits_view.remove_prefix(1);
    double value = 0.0;
    const auto res = std::from_chars(digits_view.data(), digits_view.data() + digits_view.size(), value,
                                     std::chars_format::fixed);
    if (res.ec != std::errc() || res.ptr != digits_view.data() + digits_view.size() || !std::isfinite(value)) {
      throw ParseError(std::string("malformed number after '") + letter + "'", start + 1);
    }
    words.push_back({letter, value, number, letter_col});
  }

  GcodeCommand cmd;
  if (words.empty()) return cmd;

  const Word& head = words.front();
  const std::string code = std::string(1, head.letter) + std::string(head.number);
  auto is_code = [&](char letter, int number) {
    return head.letter == letter && head.value == number && head.number.find('.') == std::string_view::npos;
  };
  if (is_code('G', 90)) cmd.kind = CommandKind::absolute_mode;
  else if (is_code('G', 91)) cmd.kind = CommandKind::relative_mode;
  else if (is_code('G', 1)) cmd.kind = CommandKind::linear_move;
  else if (is_code('G', 28)) cmd.kind = CommandKind::home;
  else if (is_code('M', 114)) cmd.kind = CommandKind::position_query;
  else throw unsupported("unsupported command '" + code + "'", head.column);

  const bool takes_axes = cmd.kind == CommandKind::linear_move || cmd.kind == CommandKind::home;
  for (std::size_t w = 1; w < words.size(); ++w) {
    const Word& word = words[w];
    const std::string rendered = std::string(1, word.letter) + std::string(word.number);
    if (word.letter == 'F' && cmd.kind == CommandKind::linear_move) {
      if (cmd.feed) throw ParseError("duplicate feed word", word.column);
      if (!(word.value > 0.0)) throw ParseError("feed must be > 0", word.column);
      cmd.feed = word.value;
      continue;
    }
    if (!takes_axes || !axis_map.find(word.letter)) {
      throw unsupported("unsupported word '" + rendered + "'", word.column);
    }
    if (cmd.value(word.letter)) {
      throw ParseError(std::string("duplicate axis word '") + word.letter + "'", word.column);
    }
    cmd.axis_words.push_back({word.letter, word.value});
  }
  if (cmd.kind == CommandKind::linear_move && cmd.axis_words.empty()) {
    throw ParseError("G1 requires at least one axis word", head.column);
  }
  return cmd;
}

// Applies absolute axis words onto `base`, mapping carts back to deployed lengths.
inline JointConfig joints_from_axis_words(const GcodeCommand& cmd, const AxisMap& axis_map, JointConfig base) {
  for (const auto& w : cmd.axis_words) {
    const auto ref = axis_map.find(w.letter);
    if (!ref) throw Error(ErrorCode::config_error, std::string("unknown axis '") + w.letter + "'");
    const auto& e = axis_map.entries()[ref->index];
    const auto k = static_cast<std::size_t>(e.tube) - 1;
    if (k >= base.size()) throw Error(ErrorCode::config_error, "axis map names a tube outside the robot");
    if (ref->rotation) base.rotations[k] = w.value;
    else base.translations[k] = w.value + e.home_offset;
  }
  return base;
}

// The joint configuration a board receives after `target` is printed at
// three decimals.
inline JointConfig quantize_to_print(const JointConfig& target, const AxisMap& axis_map) {
  GcodeCommand cmd;
  for (const auto& w : axis_words_for(target, axis_map)) {
    cmd.axis_words.push_back({w.letter, std::stod(format_axis_value(w.value))});
  }
  return joints_from_axis_words(cmd, axis_map, target);
}

}  // namespace ctrkit
