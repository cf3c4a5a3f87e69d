#include "tfmlab/config.hpp"

#include "tfmlab/error.hpp"
#include "tfmlab/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace tfmlab {
namespace {

// ---------------------------------------------------------------------------
// Text format reader

class TextParser
{
public:
  explicit TextParser(std::string_view text)
    : text_(text)
  {}

  nlohmann::json Parse()
  {
    nlohmann::json  root  = nlohmann::json::object();
    nlohmann::json *table = &root;
    std::string     table_name;
    while (true)
    {
      SkipBlank(true);
      if (AtEnd())
      {
        break;
      }
      if (Peek() == '[')
      {
        Advance();
        if (Peek() == '[')
        {
          Fail("arrays of tables are not supported; use an array of inline tables");
        }
        SkipSpaces();
        auto const path = DottedKey();
        SkipSpaces();
        Expect(']');
        EndOfLine();
        table      = &root;
        table_name = Join(path);
        for (auto const &part : path)
        {
          auto &next = (*table)[part];
          if (next.is_null())
          {
            next = nlohmann::json::object();
          }
          else if (!next.is_object())
          {
            Fail(fmt::format("'{}' is already a value", table_name));
          }
          table = &next;
        }
        if (!defined_tables_.insert(table_name).second)
        {
          Fail(fmt::format("table [{}] defined twice", table_name));
        }
        continue;
      }
      auto const path = DottedKey();
      SkipSpaces();
      Expect('=');
      SkipSpaces();
      auto value = Value();
      EndOfLine();
      Assign(*table, path, std::move(value), table_name);
    }
    return root;
  }

private:
  [[noreturn]] void Fail(std::string const &what) const
  {
    throw ConfigError(fmt::format("line {}: {}", line_, what));
  }

  bool AtEnd() const
  {
    return pos_ >= text_.size();
  }
  char Peek() const
  {
    return AtEnd() ? '\0' : text_[pos_];
  }
  char Advance()
  {
    char const c = text_[pos_++];
    if (c == '\n')
    {
      ++line_;
    }
    return c;
  }
  void Expect(char c)
  {
    if (Peek() != c)
    {
      Fail(fmt::format("expected '{}'", c));
    }
    Advance();
  }

  void SkipSpaces()
  {
    while (!AtEnd() && (Peek() == ' ' || Peek() == '\t' || Peek() == '\r'))
    {
      Advance();
    }
  }

  // whitespace and comments, optionally across newlines
  void SkipBlank(bool newlines)
  {
    while (!AtEnd())
    {
      char const c = Peek();
      if (c == ' ' || c == '\t' || c == '\r' || (newlines && c == '\n'))
      {
        Advance();
      }
      else if (c == '#')
      {
        while (!AtEnd() && Peek() != '\n')
        {
          Advance();
        }
      }
      else
      {
        break;
      }
    }
  }

  void EndOfLine()
  {
    SkipBlank(false);
    if (!AtEnd() && Peek() != '\n')
    {
      Fail("unexpected text after value");
    }
  }

  static bool BareKeyChar(char c)
  {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string Key()
  {
    if (Peek() == '"')
    {
      return BasicString();
    }
    std::string key;
    while (!AtEnd() && BareKeyChar(Peek()))
    {
      key.push_back(Advance());
    }
    if (key.empty())
    {
      Fail("expected a key");
    }
    return key;
  }

  std::vector<std::string> DottedKey()
  {
    std::vector<std::string> path{Key()};
    SkipSpaces();
    while (Peek() == '.')
    {
      Advance();
      SkipSpaces();
      path.push_back(Key());
      SkipSpaces();
    }
    return path;
  }

  static std::string Join(std::vector<std::string> const &path)
  {
    std::string out;
    for (auto const &p : path)
    {
      out += (out.empty() ? "" : ".") + p;
    }
    return out;
  }

  void Assign(nlohmann::json &table, std::vector<std::string> const &path, nlohmann::json value,
              std::string const &table_name)
  {
    nlohmann::json *at = &table;
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
    {
      auto &next = (*at)[path[i]];
      if (next.is_null())
      {
        next = nlohmann::json::object();
      }
      else if (!next.is_object())
      {
        Fail(fmt::format("'{}' is not a table", path[i]));
      }
      at = &next;
    }
    if (at->contains(path.back()))
    {
      auto const full = table_name.empty() ? Join(path) : table_name + "." + Join(path);
      Fail(fmt::format("duplicate key '{}'", full));
    }
    (*at)[path.back()] = std::move(value);
  }

  nlohmann::json Value()
  {
    char const c = Peek();
    if (c == '"')
    {
      return BasicString();
    }
    if (c == '\'')
    {
      Advance();
      std::string s;
      while (!AtEnd() && Peek() != '\'' && Peek() != '\n')
      {
        s.push_back(Advance());
      }
      Expect('\'');
      return s;
    }
    if (c == '[')
    {
      return Array();
    }
    if (c == '{')
    {
      return InlineTable();
    }
    if (text_.substr(pos_, 4) == "true")
    {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "false")
    {
      pos_ += 5;
      return false;
    }
    return Number();
  }

  std::string BasicString()
  {
    Expect('"');
    std::string s;
    while (true)
    {
      if (AtEnd() || Peek() == '\n')
      {
        Fail("unterminated string");
      }
      char const c = Advance();
      if (c == '"')
      {
        return s;
      }
      if (c != '\\')
      {
        s.push_back(c);
        continue;
      }
      if (AtEnd())
      {
        Fail("unterminated escape");
      }
      char const e = Advance();
      switch (e)
      {
      case 'n': s.push_back('\n'); break;
      case 't': s.push_back('\t'); break;
      case 'r': s.push_back('\r'); break;
      case 'b': s.push_back('\b'); break;
      case 'f': s.push_back('\f'); break;
      case '"': s.push_back('"'); break;
      case '\\': s.push_back('\\'); break;
      case '/': s.push_back('/'); break;
      case 'u':
      {
        // reuse the JSON decoder for \uXXXX, surrogate pairs included
        std::string esc = "\"\\u";
        for (int i = 0; i < 4; ++i)
        {
          esc.push_back(Advance());
        }
        if (esc[3] == 'D' || esc[3] == 'd')
        {
          for (int i = 0; i < 6 && !AtEnd(); ++i)
          {
            esc.push_back(Advance());
          }
        }
        esc.push_back('"');
        try
        {
          s += nlohmann::json::parse(esc).get<std::string>();
        }
        catch (nlohmann::json::exception const &)
        {
          Fail("bad unicode escape");
        }
        break;
      }
      default:
        Fail(fmt::format("unknown escape '\\{}'", e));
      }
    }
  }

  nlohmann::json Array()
  {
    Expect('[');
    nlohmann::json arr = nlohmann::json::array();
    while (true)
    {
      SkipBlank(true);
      if (Peek() == ']')
      {
        Advance();
        return arr;
      }
      arr.push_back(Value());
      SkipBlank(true);
      if (Peek() == ',')
      {
        Advance();
        continue;
      }
      SkipBlank(true);
      Expect(']');
      return arr;
    }
  }

  nlohmann::json InlineTable()
  {
    Expect('{');
    nlohmann::json table = nlohmann::json::object();
    SkipBlank(true);
    if (Peek() == '}')
    {
      Advance();
      return table;
    }
    while (true)
    {
      SkipBlank(true);
      auto const path = DottedKey();
      SkipSpaces();
      Expect('=');
      SkipSpaces();
      Assign(table, path, Value(), "");
      SkipBlank(true);
      if (Peek() == ',')
      {
        Advance();
        SkipBlank(true);
        if (Peek() == '}')
        {
          Advance();
          return table;
        }
        continue;
      }
      Expect('}');
      return table;
    }
  }

  nlohmann::json Number()
  {
    std::string token;
    while (!AtEnd() && (std::isalnum(static_cast<unsigned char>(Peek())) || Peek() == '+' || Peek() == '-' ||
                        Peek() == '.' || Peek() == '_'))
    {
      char const c = Advance();
      if (c != '_')
      {
        token.push_back(c);
      }
    }
    if (token.empty())
    {
      Fail("expected a value");
    }
    std::string_view body = token;
    bool const       negative = !body.empty() && body.front() == '-';
    if (!body.empty() && (body.front() == '+' || body.front() == '-'))
    {
      body.remove_prefix(1);
    }
    if (body == "inf")
    {
      return negative ? -HUGE_VAL : HUGE_VAL;
    }
    if (body == "nan")
    {
      Fail("nan is not a valid setting");
    }
    bool const is_float = token.find_first_of(".eE") != std::string::npos;
    if (!is_float)
    {
      if (negative)
      {
        std::int64_t v = 0;
        auto [p, ec]   = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec == std::errc() && p == token.data() + token.size())
        {
          return v;
        }
      }
      else
      {
        std::uint64_t v = 0;
        auto [p, ec]    = std::from_chars(body.data(), body.data() + body.size(), v);
        if (ec == std::errc() && p == body.data() + body.size())
        {
          if (v <= static_cast<std::uint64_t>(INT64_MAX))
          {
            return static_cast<std::int64_t>(v);
          }
          return v;
        }
      }
      Fail(fmt::format("bad number '{}'", token));
    }
    char  *end = nullptr;
    double v   = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size())
    {
      Fail(fmt::format("bad number '{}'", token));
    }
    return v;
  }

  std::string_view      text_;
  std::size_t           pos_{0};
  std::size_t           line_{1};
  std::set<std::string> defined_tables_;
};

// ---------------------------------------------------------------------------
// Text format writer

bool BareKey(std::string const &key)
{
  return !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

std::string KeyText(std::string const &key)
{
  return BareKey(key) ? key : nlohmann::json(key).dump();
}

std::string ValueText(nlohmann::json const &v)
{
  switch (v.type())
  {
  case nlohmann::json::value_t::string:
  case nlohmann::json::value_t::boolean:
  case nlohmann::json::value_t::number_integer:
  case nlohmann::json::value_t::number_unsigned:
    return v.dump();
  case nlohmann::json::value_t::number_float:
  {
    double const x = v.get<double>();
    if (std::isinf(x))
    {
      return x > 0 ? "inf" : "-inf";
    }
    auto s = fmt::format("{}", x);
    if (s.find_first_of(".eE") == std::string::npos)
    {
      s += ".0";
    }
    return s;
  }
  case nlohmann::json::value_t::array:
  {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i)
    {
      out += (i ? ", " : "") + ValueText(v[i]);
    }
    return out + "]";
  }
  case nlohmann::json::value_t::object:
  {
    if (v.empty())
    {
      return "{}";
    }
    std::string out = "{ ";
    bool        first = true;
    for (auto const &[k, x] : v.items())
    {
      out += (first ? "" : ", ") + KeyText(k) + " = " + ValueText(x);
      first = false;
    }
    return out + " }";
  }
  default:
    throw ConfigError("null values cannot be written to the config format");
  }
}

void WriteTable(nlohmann::json const &table, std::string const &path, std::string &out)
{
  for (auto const &[k, v] : table.items())
  {
    if (!v.is_object())
    {
      out += KeyText(k) + " = " + ValueText(v) + "\n";
    }
  }
  for (auto const &[k, v] : table.items())
  {
    if (v.is_object())
    {
      auto const sub = path.empty() ? KeyText(k) : path + "." + KeyText(k);
      out += "\n[" + sub + "]\n";
      WriteTable(v, sub, out);
    }
  }
}

// ---------------------------------------------------------------------------
// Validated field access

class Fields
{
public:
  Fields(nlohmann::json const &j, std::string prefix)
    : j_(j)
    , prefix_(std::move(prefix))
  {
    if (!j_.is_object())
    {
      throw ConfigError(fmt::format("{}: expected a table", prefix_.empty() ? "config" : prefix_));
    }
  }

  std::string Key(std::string_view k) const
  {
    return prefix_.empty() ? std::string(k) : prefix_ + "." + std::string(k);
  }

  bool Has(std::string_view k)
  {
    used_.insert(std::string(k));
    return j_.contains(k);
  }

  nlohmann::json const &At(std::string_view k)
  {
    used_.insert(std::string(k));
    if (!j_.contains(k))
    {
      throw ConfigError(fmt::format("{}: required", Key(k)));
    }
    return j_.at(std::string(k));
  }

  std::string String(std::string_view k)
  {
    auto const &v = At(k);
    if (!v.is_string())
    {
      throw ConfigError(fmt::format("{}: expected a string", Key(k)));
    }
    return v.get<std::string>();
  }

  double Number(std::string_view k)
  {
    auto const &v = At(k);
    if (!v.is_number())
    {
      throw ConfigError(fmt::format("{}: expected a number", Key(k)));
    }
    return v.get<double>();
  }

  std::uint64_t Count(std::string_view k)
  {
    auto const &v = At(k);
    if (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0))
    {
      return v.get<std::uint64_t>();
    }
    throw ConfigError(fmt::format("{}: expected a non-negative integer", Key(k)));
  }

  bool Bool(std::string_view k)
  {
    auto const &v = At(k);
    if (!v.is_boolean())
    {
      throw ConfigError(fmt::format("{}: expected true or false", Key(k)));
    }
    return v.get<bool>();
  }

  template <class F>
  void Optional(std::string_view k, F &&read)
  {
    if (Has(k))
    {
      read();
    }
  }

  void Finish() const
  {
    for (auto const &[k, v] : j_.items())
    {
      if (!used_.count(k))
      {
        throw ConfigError(fmt::format("{}: unknown key", Key(k)));
      }
    }
  }

private:
  nlohmann::json const &j_;
  std::string           prefix_;
  std::set<std::string> used_;
};

std::vector<double> Numbers(Fields &f, std::string_view k)
{
  auto const &v = f.At(k);
  if (!v.is_array())
  {
    throw ConfigError(fmt::format("{}: expected an array of numbers", f.Key(k)));
  }
  std::vector<double> out;
  for (auto const &x : v)
  {
    if (!x.is_number())
    {
      throw ConfigError(fmt::format("{}: expected an array of numbers", f.Key(k)));
    }
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<std::string> Strings(Fields &f, std::string_view k)
{
  auto const &v = f.At(k);
  if (!v.is_array())
  {
    throw ConfigError(fmt::format("{}: expected an array of strings", f.Key(k)));
  }
  std::vector<std::string> out;
  for (auto const &x : v)
  {
    if (!x.is_string())
    {
      throw ConfigError(fmt::format("{}: expected an array of strings", f.Key(k)));
    }
    out.push_back(x.get<std::string>());
  }
  return out;
}

std::vector<std::size_t> Counts(Fields &f, std::string_view k)
{
  auto const &v = f.At(k);
  if (!v.is_array())
  {
    throw ConfigError(fmt::format("{}: expected an array of integers", f.Key(k)));
  }
  std::vector<std::size_t> out;
  for (auto const &x : v)
  {
    if (!(x.is_number_unsigned() || (x.is_number_integer() && x.get<std::int64_t>() >= 0)))
    {
      throw ConfigError(fmt::format("{}: expected an array of non-negative integers", f.Key(k)));
    }
    out.push_back(x.get<std::size_t>());
  }
  return out;
}

std::vector<std::string> const &EstimateNames()
{
  static std::vector<std::string> const names = {"revenue", "interim", "virtual_welfare", "benchmark"};
  return names;
}

Thresholds ReadThresholds(nlohmann::json const &j)
{
  Fields     f(j, "thresholds");
  Thresholds t;
  f.Optional("z", [&] { t.z = f.Number("z"); });
  f.Optional("abs_eps", [&] { t.abs_eps = f.Number("abs_eps"); });
  f.Optional("revenue_abs_eps", [&] { t.revenue_abs_eps = f.Number("revenue_abs_eps"); });
  f.Optional("user_abs_eps", [&] { t.user_abs_eps = f.Number("user_abs_eps"); });
  f.Finish();
  if (t.z <= 0.0 || t.abs_eps < 0.0 || t.revenue_abs_eps < 0.0 || t.user_abs_eps < 0.0)
  {
    throw ConfigError("thresholds: z must be positive and floors non-negative");
  }
  return t;
}

SearchBudget ReadBudget(nlohmann::json const &j)
{
  Fields       f(j, "grids");
  SearchBudget b;
  auto         count = [&](char const *key, auto &field) {
    f.Optional(key, [&] { field = static_cast<std::remove_reference_t<decltype(field)>>(f.Count(key)); });
  };
  count("value_points", b.value_points);
  count("bid_points", b.bid_points);
  count("reserve_points", b.reserve_points);
  count("fabricate_max", b.fabricate_max);
  count("fabricate_points", b.fabricate_points);
  count("opp_samples", b.opp_samples);
  count("dra_grid_points", b.dra_grid_points);
  count("contract_points", b.contract_points);
  count("confirm_top", b.confirm_top);
  count("screen_reps", b.screen_reps);
  count("collusion_screen_reps", b.collusion_screen_reps);
  f.Finish();
  if (b.value_points < 2 || b.bid_points < 2 || b.contract_points < 2)
  {
    throw ConfigError("grids: value_points, bid_points and contract_points must be >= 2");
  }
  return b;
}

nlohmann::json BudgetGridsJson(SearchBudget const &b)
{
  auto j = b.ToJson();
  j.erase("reps");
  return j;
}

void CheckVerdictName(std::string const &key, std::string const &value)
{
  if (value != VerdictName(Verdict::kViolation) && value != VerdictName(Verdict::kNoViolationFound))
  {
    throw ConfigError(fmt::format("{}: expected \"VIOLATION\" or \"NO_VIOLATION_FOUND\"", key));
  }
}

}  // namespace

nlohmann::json ParseConfigText(std::string_view text)
{
  auto const first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{')
  {
    try
    {
      return nlohmann::json::parse(text);
    }
    catch (nlohmann::json::parse_error const &e)
    {
      throw ConfigError(fmt::format("invalid JSON: {}", e.what()));
    }
  }
  return TextParser(text).Parse();
}

std::string SerializeConfig(nlohmann::json const &doc)
{
  if (!doc.is_object())
  {
    throw ConfigError("config document must be a table");
  }
  std::string out;
  WriteTable(doc, "", out);
  return out;
}

// ---------------------------------------------------------------------------
// Strategy vocabulary

UserStrategy UserStrategyFromJson(nlohmann::json const &j, Game const &game)
{
  Fields      f(j, "users");
  auto const  name = f.String("strategy");
  UserStrategy s   = UserStrategy::Truthful();
  if (name == "truthful")
  {
  }
  else if (name == "shade_wpb")
  {
    double       reserve = 0.0;
    BelowReserve below   = BelowReserve::kBidValue;
    f.Optional("reserve", [&] { reserve = f.Number("reserve"); });
    f.Optional("below", [&] {
      auto const b = f.String("below");
      if (b == "bid_value")
      {
        below = BelowReserve::kBidValue;
      }
      else if (b == "bid_zero")
      {
        below = BelowReserve::kBidZero;
      }
      else
      {
        throw ConfigError(fmt::format("{}: expected bid_value or bid_zero", f.Key("below")));
      }
    });
    s = UserStrategy::ShadeWpb(reserve, below);
  }
  else if (name == "threshold")
  {
    s = UserStrategy::Threshold(f.Number("reserve"));
  }
  else if (name == "fixed")
  {
    s = UserStrategy::Fixed(f.Number("bid"));
  }
  else if (name == "dra_truthful_reveal")
  {
    s = UserStrategy::DraTruthfulReveal();
  }
  else
  {
    throw ConfigError(fmt::format("{}: unknown user strategy '{}'", f.Key("strategy"), name));
  }
  f.Finish();
  (void)game;
  return s;
}

MinerStrategy MinerStrategyFromJson(nlohmann::json const &j, Game const &game)
{
  Fields     f(j, "miner");
  auto const name = f.String("strategy");
  MinerStrategy s = MinerStrategy::Compliant(0.0);
  if (name == "compliant")
  {
    double advice = 0.0;
    f.Optional("advice", [&] {
      auto const &a = f.At("advice");
      if (a.is_string() && a.get<std::string>() == "monopoly")
      {
        advice = MonopolyReserveOrFallback(game.dist).value;
      }
      else if (a.is_number())
      {
        advice = a.get<double>();
      }
      else
      {
        throw ConfigError(fmt::format("{}: expected a number or \"monopoly\"", f.Key("advice")));
      }
    });
    s = MinerStrategy::Compliant(advice);
  }
  else if (name == "censor")
  {
    if (f.Has("ids"))
    {
      std::vector<BidId> ids;
      for (auto c : Counts(f, "ids"))
      {
        ids.push_back(static_cast<BidId>(c));
      }
      s = MinerStrategy::CensorIds(std::move(ids));
    }
    else
    {
      s = MinerStrategy::CensorLowest(f.Count("lowest"));
    }
  }
  else if (name == "fabricate")
  {
    s = MinerStrategy::Fabricate(Numbers(f, "bids"));
  }
  else if (name == "reserve_at_max_bid")
  {
    s = MinerStrategy::ReserveAtMaxBid();
  }
  else if (name == "p2pa_revenue_reserve")
  {
    std::size_t k = game.mech.k == kUnlimited ? game.n : game.mech.k;
    f.Optional("k", [&] { k = f.Count("k"); });
    s = MinerStrategy::P2paRevenueReserve(k);
  }
  else if (name == "entry_fee_censor")
  {
    std::vector<BidId> paid;
    for (auto c : Counts(f, "paid"))
    {
      paid.push_back(static_cast<BidId>(c));
    }
    s = MinerStrategy::EntryFeeCensor(f.Number("gamma"), std::move(paid));
  }
  else if (name == "dra_selective_reveal")
  {
    if (f.Has("grid"))
    {
      s = MinerStrategy::DraSelectiveReveal(Numbers(f, "grid"));
    }
    else
    {
      std::size_t points = 100;
      f.Optional("points", [&] { points = f.Count("points"); });
      s = MinerStrategy::DraSelectiveReveal(SupportGrid(game.dist, points));
    }
  }
  else if (name == "composite")
  {
    auto const &parts = f.At("parts");
    if (!parts.is_array() || parts.empty())
    {
      throw ConfigError(fmt::format("{}: expected a non-empty array of strategies", f.Key("parts")));
    }
    std::vector<MinerStrategy> list;
    for (auto const &p : parts)
    {
      list.push_back(MinerStrategyFromJson(p, game));
    }
    s = MinerStrategy::Composite(std::move(list));
  }
  else
  {
    throw ConfigError(fmt::format("{}: unknown miner strategy '{}'", f.Key("strategy"), name));
  }
  f.Finish();
  return s;
}

// ---------------------------------------------------------------------------

std::size_t ScenarioConfig::CheckerN() const
{
  if (checker_n)
  {
    return *checker_n;
  }
  return n_list.empty() ? 0 : n_list.front();
}

Game ScenarioConfig::MakeGame(std::size_t n) const
{
  if (!mechanism || !dist)
  {
    throw ConfigError(fmt::format("{}: matrix configs have no single game", name));
  }
  return Game{*mechanism, *dist, n};
}

OnChainProfile ScenarioConfig::MakeProfile(std::size_t n) const
{
  auto const game = MakeGame(n);
  auto const m    = MinerStrategyFromJson(miner, game);
  if (users.contains("each"))
  {
    auto const &each = users.at("each");
    if (each.size() != n)
    {
      throw ConfigError(fmt::format("users.each: {} strategies for n={}", each.size(), n));
    }
    OnChainProfile p{m, {}};
    for (auto const &u : each)
    {
      p.users.push_back(UserStrategyFromJson(u, game));
    }
    return p;
  }
  return OnChainProfile::Symmetric(m, UserStrategyFromJson(users, game), n);
}

CheckContext ScenarioConfig::MakeContext(std::uint64_t effective_seed) const
{
  CheckContext ctx{MakeGame(CheckerN()), MakeProfile(CheckerN()), thresholds, budget, effective_seed, cartel_user};
  ctx.budget.reps = reps;
  return ctx;
}

nlohmann::json ScenarioConfig::ToJson() const
{
  nlohmann::json j;
  j["name"] = name;
  j["seed"] = seed;
  j["reps"] = reps;
  if (IsMatrix())
  {
    j["golden"]   = golden;
    j["checkers"] = checkers;
    nlohmann::json rs = nlohmann::json::array();
    for (auto const &r : rows)
    {
      rs.push_back(r.ToJson());
    }
    j["rows"] = rs;
    return j;
  }
  j["label"] = label;
  j["n"]     = n_list;
  if (checker_n)
  {
    j["checker_n"] = *checker_n;
  }
  j["checkers"]        = checkers;
  j["estimates"]       = estimates;
  j["cartel_user"]     = cartel_user;
  j["allow_multi_bid"] = allow_multi_bid;
  j["mechanism"]       = mechanism->ToJson();
  j["dist"]            = dist->ToJson();
  j["miner"]           = miner;
  j["users"]           = users;
  j["thresholds"]      = thresholds.ToJson();
  j["grids"]           = BudgetGridsJson(budget);
  j["interim"]         = {{"user", interim.user}, {"points", interim.points}, {"tol", interim.tol}};
  j["constant_revenue"] = {{"conditioning", constant_revenue.conditioning}};
  j["expect"]           = expect;
  return j;
}

ScenarioConfig ScenarioConfig::FromJson(nlohmann::json const &j, std::filesystem::path const &base_dir)
{
  Fields         f(j, "");
  ScenarioConfig cfg;
  cfg.name = f.String("name");
  if (!f.Has("seed"))
  {
    throw ConfigError("seed: required (there is no wall-clock default)");
  }
  cfg.seed = f.Count("seed");
  f.Optional("reps", [&] { cfg.reps = f.Count("reps"); });
  if (cfg.reps < 2)
  {
    throw ConfigError("reps: must be >= 2");
  }

  if (f.Has("rows"))
  {
    f.Optional("golden", [&] { cfg.golden = f.String("golden"); });
    cfg.checkers = {std::string(kOffChainInfluence), std::string(kUserSimplicity), std::string(kMinerSimplicity)};
    f.Optional("checkers", [&] { cfg.checkers = Strings(f, "checkers"); });
    auto const &rows = f.At("rows");
    if (!rows.is_array() || rows.empty())
    {
      throw ConfigError("rows: expected a non-empty array of scenario paths or tables");
    }
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
      ScenarioConfig row;
      if (rows[i].is_string())
      {
        row = LoadScenario(base_dir / rows[i].get<std::string>());
      }
      else
      {
        try
        {
          row = FromJson(rows[i], base_dir);
        }
        catch (ConfigError const &e)
        {
          throw ConfigError(fmt::format("rows[{}].{}", i, e.what()));
        }
      }
      if (row.IsMatrix())
      {
        throw ConfigError(fmt::format("rows[{}]: nested matrices are not supported", i));
      }
      // the matrix owns seed and reps
      row.seed     = cfg.seed;
      row.reps     = cfg.reps;
      row.checkers = cfg.checkers;
      cfg.rows.push_back(std::move(row));
    }
    f.Finish();
    for (auto const &c : cfg.checkers)
    {
      if (std::find(CheckerNames().begin(), CheckerNames().end(), c) == CheckerNames().end() ||
          c == kConstantRevenue)
      {
        throw ConfigError(fmt::format("checkers: unknown or unsupported checker '{}'", c));
      }
    }
    return cfg;
  }

  cfg.label = cfg.name;
  f.Optional("label", [&] { cfg.label = f.String("label"); });
  cfg.n_list = Counts(f, "n");
  if (cfg.n_list.empty())
  {
    throw ConfigError("n: expected at least one value");
  }
  f.Optional("checker_n", [&] { cfg.checker_n = f.Count("checker_n"); });
  f.Optional("checkers", [&] { cfg.checkers = Strings(f, "checkers"); });
  f.Optional("estimates", [&] { cfg.estimates = Strings(f, "estimates"); });
  f.Optional("cartel_user", [&] { cfg.cartel_user = f.Count("cartel_user"); });
  f.Optional("allow_multi_bid", [&] { cfg.allow_multi_bid = f.Bool("allow_multi_bid"); });

  try
  {
    cfg.mechanism = MechanismConfig::FromJson(f.At("mechanism"));
  }
  catch (InvalidParameter const &e)
  {
    std::string msg = e.what();
    throw ConfigError(msg.rfind("mechanism", 0) == 0 ? msg : "mechanism: " + msg);
  }
  try
  {
    cfg.dist = ValueDistribution::FromJson(f.At("dist"));
  }
  catch (InvalidParameter const &e)
  {
    throw ConfigError(fmt::format("dist: {}", e.what()));
  }
  catch (ZeroDensity const &e)
  {
    throw ConfigError(fmt::format("dist: {}", e.what()));
  }
  cfg.miner = f.Has("miner") ? f.At("miner") : nlohmann::json{{"strategy", "compliant"}};
  if (f.Has("users"))
  {
    cfg.users = f.At("users");
  }
  else
  {
    cfg.users = {{"strategy", cfg.mechanism->kind == MechanismKind::kDra ? "dra_truthful_reveal" : "truthful"}};
  }
  f.Optional("thresholds", [&] { cfg.thresholds = ReadThresholds(f.At("thresholds")); });
  f.Optional("grids", [&] { cfg.budget = ReadBudget(f.At("grids")); });
  f.Optional("interim", [&] {
    Fields g(f.At("interim"), "interim");
    g.Optional("user", [&] { cfg.interim.user = g.Count("user"); });
    g.Optional("points", [&] { cfg.interim.points = g.Count("points"); });
    g.Optional("tol", [&] { cfg.interim.tol = g.Number("tol"); });
    g.Finish();
  });
  f.Optional("constant_revenue", [&] {
    Fields g(f.At("constant_revenue"), "constant_revenue");
    g.Optional("conditioning", [&] { cfg.constant_revenue.conditioning = Numbers(g, "conditioning"); });
    g.Finish();
  });
  f.Optional("expect", [&] {
    Fields      g(f.At("expect"), "expect");
    auto const &e = f.At("expect");
    for (auto const &[k, v] : e.items())
    {
      auto const value = g.String(k);
      CheckVerdictName(g.Key(k), value);
      cfg.expect[k] = value;
    }
    g.Finish();
  });
  f.Finish();

  for (auto const &c : cfg.checkers)
  {
    if (std::find(CheckerNames().begin(), CheckerNames().end(), c) == CheckerNames().end())
    {
      throw ConfigError(fmt::format("checkers: unknown checker '{}'", c));
    }
  }
  for (auto const &[k, v] : cfg.expect)
  {
    if (std::find(cfg.checkers.begin(), cfg.checkers.end(), k) == cfg.checkers.end())
    {
      throw ConfigError(fmt::format("expect.{}: checker is not in the checkers list", k));
    }
  }
  for (auto const &e : cfg.estimates)
  {
    if (std::find(EstimateNames().begin(), EstimateNames().end(), e) == EstimateNames().end())
    {
      throw ConfigError(fmt::format("estimates: unknown estimate '{}'", e));
    }
  }
  if (cfg.cartel_user >= std::max<std::size_t>(cfg.CheckerN(), 1) && !cfg.checkers.empty())
  {
    throw ConfigError("cartel_user: out of range for checker_n");
  }
  if (cfg.interim.points < 2)
  {
    throw ConfigError("interim.points: must be >= 2");
  }

  // build the profile once so vocabulary errors surface at load time
  if (!cfg.users.is_object())
  {
    throw ConfigError("users: expected a table");
  }
  try
  {
    auto const profile = cfg.MakeProfile(cfg.CheckerN());
    if (!cfg.allow_multi_bid)
    {
      for (auto const &u : profile.users)
      {
        if (u.MultiBid())
        {
          throw ConfigError("users: multi-bid strategies need allow_multi_bid = true");
        }
      }
    }
  }
  catch (InvalidParameter const &e)
  {
    throw ConfigError(fmt::format("users/miner: {}", e.what()));
  }
  return cfg;
}

ScenarioConfig LoadScenario(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw ConfigError(fmt::format("{}: cannot open config file", path.string()));
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  try
  {
    return ScenarioConfig::FromJson(ParseConfigText(buffer.str()), path.parent_path());
  }
  catch (ConfigError const &e)
  {
    throw ConfigError(fmt::format("{}: {}", path.filename().string(), e.what()));
  }
}

std::string CanonicalText(ScenarioConfig const &cfg)
{
  return cfg.ToJson().dump();
}

std::string ScenarioHash(ScenarioConfig const &cfg)
{
  auto j = cfg.ToJson();
  j.erase("golden");
  return fmt::format("{:016x}", Mix64(HashLabel(j.dump())));
}

}  // namespace tfmlab
