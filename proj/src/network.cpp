#include "scanforge/network.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>

namespace scanforge {

std::optional<ScanKind> parse_scan_kind(std::string_view name) {
  std::string s;
  for (char c : name) {
    if (c == '-' || c == '_' || c == ' ') continue;
    s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (s == "serial") return ScanKind::Serial;
  if (s == "blelloch") return ScanKind::Blelloch;
  if (s == "brentkung" || s == "bk") return ScanKind::BrentKung;
  if (s == "koggestone" || s == "ks") return ScanKind::KoggeStone;
  if (s == "sklansky") return ScanKind::Sklansky;
  return std::nullopt;
}

std::size_t ScanNetwork::size() const noexcept {
  std::size_t s = 0;
  for (const Step& step : steps) {
    s += static_cast<std::size_t>(
        std::count_if(step.begin(), step.end(), [](const Node& n) { return n.is_application(); }));
  }
  return s;
}

std::size_t ScanNetwork::depth() const noexcept {
  return static_cast<std::size_t>(std::count_if(steps.begin(), steps.end(), [](const Step& step) {
    return std::any_of(step.begin(), step.end(), [](const Node& n) { return n.is_application(); });
  }));
}

namespace {

Node combine(std::size_t src, std::size_t dst) { return {src, dst, NodeOp::Combine}; }

void build_serial(ScanNetwork& net) {
  for (std::size_t i = 1; i < net.n; ++i) net.steps.push_back({combine(i - 1, i)});
}

void build_upsweep(ScanNetwork& net, std::size_t levels) {
  for (std::size_t i = 0; i < levels; ++i) {
    const std::size_t half = std::size_t{1} << i;
    Step step;
    for (std::size_t j = 2 * half - 1; j < net.n; j += 2 * half) step.push_back(combine(j - half, j));
    net.steps.push_back(std::move(step));
  }
}

void build_blelloch(ScanNetwork& net) {
  const std::size_t levels = ilog2(net.n);
  build_upsweep(net, levels);
  net.steps.push_back({Node{Node::kNoSource, net.n - 1, NodeOp::Reset}});
  for (std::size_t i = levels; i-- > 0;) {
    const std::size_t half = std::size_t{1} << i;
    Step step;
    for (std::size_t j = 2 * half - 1; j < net.n; j += 2 * half) {
      step.push_back({j, j - half, NodeOp::Copy});
      step.push_back({j - half, j, NodeOp::CombineReversed});
    }
    net.steps.push_back(std::move(step));
  }
}

void build_brent_kung(ScanNetwork& net) {
  const std::size_t levels = ilog2(net.n);
  build_upsweep(net, levels);
  for (std::size_t i = levels < 2 ? 0 : levels - 1; i-- > 0;) {
    const std::size_t half = std::size_t{1} << i;
    Step step;
    for (std::size_t j = 2 * half; j < net.n - 1; j += 2 * half) {
      step.push_back(combine(j - 1, j + half - 1));
    }
    net.steps.push_back(std::move(step));
  }
}

void build_kogge_stone(ScanNetwork& net) {
  for (std::size_t d = 1; d < net.n; d <<= 1) {
    Step step;
    for (std::size_t j = d; j < net.n; ++j) step.push_back(combine(j - d, j));
    net.steps.push_back(std::move(step));
  }
}

void build_sklansky(ScanNetwork& net) {
  for (std::size_t d = 1; d < net.n; d <<= 1) {
    Step step;
    for (std::size_t j = d - 1; j < net.n; j += 2 * d) {
      for (std::size_t k = 0; k < d; ++k) step.push_back(combine(j, j + k + 1));
    }
    net.steps.push_back(std::move(step));
  }
}

std::string node_label(std::size_t step, std::size_t index, const Node& node) {
  std::ostringstream os;
  os << "step " << step << " node " << index << " (";
  if (node.src == Node::kNoSource) {
    os << '-';
  } else {
    os << node.src;
  }
  os << ',' << node.dst << ')';
  return os.str();
}

std::string word_text(const std::vector<std::uint32_t>& word) {
  if (word.empty()) return "<identity>";
  std::string s;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i != 0) s.push_back(' ');
    s += 'x' + std::to_string(word[i]);
  }
  return s;
}

}  // namespace

ScanNetwork build_network(ScanKind kind, std::size_t n) {
  if (n == 0) throw SizeError("network width must be positive");
  if (kind != ScanKind::Serial && !is_power_of_two(n)) {
    throw SizeError(std::string(to_string(kind)) + " network needs a power-of-two width, got " +
                    std::to_string(n));
  }
  ScanNetwork net;
  net.n = n;
  net.name = std::string(to_string(kind));
  net.exclusive = is_exclusive(kind);
  switch (kind) {
    case ScanKind::Serial: build_serial(net); break;
    case ScanKind::Blelloch: build_blelloch(net); break;
    case ScanKind::BrentKung: build_brent_kung(net); break;
    case ScanKind::KoggeStone: build_kogge_stone(net); break;
    case ScanKind::Sklansky: build_sklansky(net); break;
  }
  return net;
}

ScanNetwork prune_network(const ScanNetwork& net, const std::vector<bool>& required) {
  if (required.size() != net.n) throw SizeError("required-lane mask has the wrong width");
  ScanNetwork out = net;
  std::vector<bool> needed = required;
  for (std::size_t s = out.steps.size(); s-- > 0;) {
    Step kept;
    std::vector<bool> before = needed;
    for (const Node& node : out.steps[s]) {
      if (!needed[node.dst]) continue;
      kept.push_back(node);
      if (node.op == NodeOp::Copy || node.op == NodeOp::Reset) before[node.dst] = false;
    }
    for (const Node& node : kept) {
      if (node.src != Node::kNoSource) before[node.src] = true;
    }
    out.steps[s] = std::move(kept);
    needed = std::move(before);
  }
  return out;
}

void check_structure(const ScanNetwork& net) {
  std::vector<std::size_t> written(net.n, 0);
  for (std::size_t s = 0; s < net.steps.size(); ++s) {
    const Step& step = net.steps[s];
    for (std::size_t k = 0; k < step.size(); ++k) {
      const Node& node = step[k];
      const std::string where = node_label(s, k, node);
      if (node.dst >= net.n) throw NetworkError(where + ": destination out of range");
      if (node.op == NodeOp::Reset) {
        if (node.src != Node::kNoSource) throw NetworkError(where + ": reset takes no source");
      } else {
        if (node.src >= net.n) throw NetworkError(where + ": source out of range");
        if (node.src == node.dst) throw NetworkError(where + ": source equals destination");
      }
      if (written[node.dst] == s + 1) {
        throw NetworkError(where + ": lane " + std::to_string(node.dst) +
                           " written twice in one step");
      }
      written[node.dst] = s + 1;
    }
  }
}

std::vector<std::size_t> VerificationReport::invalid_lanes() const {
  std::vector<std::size_t> out;
  for (const LaneReport& l : lanes) {
    if (!l.valid) out.push_back(l.lane);
  }
  return out;
}

VerificationReport verify_network(const ScanNetwork& net) {
  check_structure(net);
  using Word = std::vector<std::uint32_t>;
  std::vector<Word> cur(net.n);
  for (std::size_t i = 0; i < net.n; ++i) cur[i] = {static_cast<std::uint32_t>(i)};
  std::vector<Word> next;
  for (const Step& step : net.steps) {
    next = cur;
    for (const Node& node : step) {
      Word& out = next[node.dst];
      switch (node.op) {
        case NodeOp::Combine:
          out = cur[node.src];
          out.insert(out.end(), cur[node.dst].begin(), cur[node.dst].end());
          break;
        case NodeOp::CombineReversed:
          out = cur[node.dst];
          out.insert(out.end(), cur[node.src].begin(), cur[node.src].end());
          break;
        case NodeOp::Copy: out = cur[node.src]; break;
        case NodeOp::Reset: out.clear(); break;
      }
    }
    cur.swap(next);
  }

  VerificationReport report;
  report.lanes.reserve(net.n);
  for (std::size_t i = 0; i < net.n; ++i) {
    const std::size_t len = net.exclusive ? i : i + 1;
    bool valid = cur[i].size() == len;
    for (std::size_t k = 0; valid && k < len; ++k) valid = cur[i][k] == k;
    LaneReport lane{i, valid, {}, {}};
    if (!valid) {
      Word expected(len);
      for (std::size_t k = 0; k < len; ++k) expected[k] = static_cast<std::uint32_t>(k);
      lane.computed = word_text(cur[i]);
      lane.expected = word_text(expected);
      report.ok = false;
    }
    report.lanes.push_back(std::move(lane));
  }
  return report;
}

void write_network(std::ostream& out, const ScanNetwork& net) {
  out << "n " << net.n << " kind " << (net.name.empty() ? "custom" : net.name);
  const auto named = parse_scan_kind(net.name);
  if (net.exclusive && !(named && is_exclusive(*named))) out << " exclusive";
  out << '\n';
  for (std::size_t s = 0; s < net.steps.size(); ++s) {
    out << "step " << s << ':';
    for (const Node& node : net.steps[s]) {
      out << " (";
      if (node.op == NodeOp::Reset) {
        out << "-," << node.dst << ",reset)";
        continue;
      }
      out << node.src << ',' << node.dst;
      if (node.op == NodeOp::CombineReversed) out << ",rev";
      if (node.op == NodeOp::Copy) out << ",copy";
      out << ')';
    }
    out << '\n';
  }
}

std::string to_text(const ScanNetwork& net) {
  std::ostringstream os;
  write_network(os, net);
  return os.str();
}

namespace {

std::size_t parse_index(const std::string& token, std::size_t line_no) {
  if (token.empty() || !std::all_of(token.begin(), token.end(),
                                    [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw NetworkError("line " + std::to_string(line_no) + ": bad lane index '" + token + "'");
  }
  return std::stoull(token);
}

Node parse_node(const std::string& body, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(body);
  while (std::getline(is, field, ',')) {
    field.erase(std::remove_if(field.begin(), field.end(),
                               [](char c) { return std::isspace(static_cast<unsigned char>(c)); }),
                field.end());
    fields.push_back(field);
  }
  if (fields.size() < 2 || fields.size() > 3) {
    throw NetworkError("line " + std::to_string(line_no) + ": malformed node '(" + body + ")'");
  }
  Node node;
  node.dst = parse_index(fields[1], line_no);
  const std::string flag = fields.size() == 3 ? fields[2] : std::string{};
  if (flag == "reset") {
    if (fields[0] != "-") throw NetworkError("line " + std::to_string(line_no) + ": reset takes '-'");
    node.op = NodeOp::Reset;
    return node;
  }
  node.src = parse_index(fields[0], line_no);
  if (flag.empty()) {
    node.op = NodeOp::Combine;
  } else if (flag == "rev") {
    node.op = NodeOp::CombineReversed;
  } else if (flag == "copy") {
    node.op = NodeOp::Copy;
  } else {
    throw NetworkError("line " + std::to_string(line_no) + ": unknown node flag '" + flag + "'");
  }
  return node;
}

}  // namespace

ScanNetwork read_network(std::istream& in) {
  ScanNetwork net;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (!have_header) {
      std::istringstream is(line);
      std::string n_tok, kind_tok, extra;
      if (!(is >> n_tok >> net.n >> kind_tok >> net.name) || n_tok != "n" || kind_tok != "kind") {
        throw NetworkError("line " + std::to_string(line_no) + ": expected 'n <width> kind <name>'");
      }
      net.exclusive = is_exclusive(parse_scan_kind(net.name).value_or(ScanKind::Serial));
      if (is >> extra) {
        if (extra != "exclusive") {
          throw NetworkError("line " + std::to_string(line_no) + ": unexpected '" + extra + "'");
        }
        net.exclusive = true;
      }
      have_header = true;
      continue;
    }
    const auto colon = line.find(':');
    if (line.compare(first, 4, "step") != 0 || colon == std::string::npos) {
      throw NetworkError("line " + std::to_string(line_no) + ": expected 'step <k>: ...'");
    }
    Step step;
    std::size_t pos = colon + 1;
    while (true) {
      const auto open = line.find('(', pos);
      if (open == std::string::npos) break;
      const auto close = line.find(')', open);
      if (close == std::string::npos) {
        throw NetworkError("line " + std::to_string(line_no) + ": unterminated node");
      }
      step.push_back(parse_node(line.substr(open + 1, close - open - 1), line_no));
      pos = close + 1;
    }
    net.steps.push_back(std::move(step));
  }
  if (!have_header) throw NetworkError("missing network header");
  return net;
}

ScanNetwork parse_network(const std::string& text) {
  std::istringstream is(text);
  return read_network(is);
}

std::string to_dot(const ScanNetwork& net) {
  std::ostringstream os;
  os << "digraph \"" << net.name << "\" {\n  rankdir=TB;\n  node [shape=circle,label=\"\"];\n";
  std::vector<std::string> latest(net.n);
  for (std::size_t i = 0; i < net.n; ++i) {
    latest[i] = "in" + std::to_string(i);
    os << "  " << latest[i] << " [shape=box,label=\"x" << i << "\"];\n";
  }
  for (std::size_t s = 0; s < net.steps.size(); ++s) {
    std::vector<std::string> updated = latest;
    for (const Node& node : net.steps[s]) {
      const std::string id = "s" + std::to_string(s) + "_" + std::to_string(node.dst);
      updated[node.dst] = id;
      switch (node.op) {
        case NodeOp::Combine:
        case NodeOp::CombineReversed:
          os << "  " << id << " [style=filled,fillcolor=black,width=0.15];\n";
          os << "  " << latest[node.src] << " -> " << id << ";\n";
          os << "  " << latest[node.dst] << " -> " << id << ";\n";
          break;
        case NodeOp::Copy:
          os << "  " << id << " [width=0.15];\n";
          os << "  " << latest[node.src] << " -> " << id << " [style=dashed];\n";
          break;
        case NodeOp::Reset: os << "  " << id << " [shape=box,label=\"I\"];\n"; break;
      }
    }
    latest.swap(updated);
  }
  for (std::size_t i = 0; i < net.n; ++i) {
    os << "  out" << i << " [shape=box,label=\"y" << i << "\"];\n";
    os << "  " << latest[i] << " -> out" << i << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace scanforge
