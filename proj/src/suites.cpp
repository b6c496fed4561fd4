#include "toc/suites.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "toc/aggregator.hpp"
#include "toc/codeprogram.hpp"
#include "toc/error.hpp"
#include "toc/sampling.hpp"
#include "toc/text.hpp"

namespace toc::suites {

using nlohmann::json;

namespace {

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : state_(sampling::splitmix64(seed)) {}
  std::size_t below(std::size_t n) { return sampling::uniform_index(next(), n); }
  int between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::size_t>(hi - lo + 1))); }
  template <class T>
  const T& pick(const std::vector<T>& items) {
    return items[below(items.size())];
  }

 private:
  std::uint64_t next() { return state_ = sampling::splitmix64(state_); }
  std::uint64_t state_;
};

std::string two_digits(int n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", n);
  return buf;
}

std::string cents_text(std::int64_t cents) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%02lld", static_cast<long long>(cents / 100), static_cast<long long>(cents % 100));
  return buf;
}

ToolDescription tool(std::string name, std::string description, std::string signature,
                     std::optional<std::string> example = std::nullopt) {
  return {std::move(name), std::move(description), std::move(signature), std::move(example)};
}

void bind_all(SuiteFile& suite, const std::vector<ToolDescription>& tools) {
  for (const auto& t : tools) suite.tool_bindings[t.name] = suite.suite_id + "." + t.name;
}

const std::vector<std::string>& phrase_words() {
  static const std::vector<std::string> words{
      "amber", "harbor", "lantern", "meadow", "orbit",  "pepper", "quartz", "river",  "signal", "tulip",
      "velvet", "willow", "canyon", "ember",  "falcon", "garnet", "island", "jasper", "kettle", "marble"};
  return words;
}

}  // namespace

std::string caesar_shift(std::string_view text, int shift) {
  const int k = ((shift % 26) + 26) % 26;
  std::string out(text);
  for (auto& c : out) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>('a' + (c - 'a' + k) % 26);
    if (c >= 'A' && c <= 'Z') c = static_cast<char>('A' + (c - 'A' + k) % 26);
  }
  return out;
}

std::string to_hex(std::string_view text) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : text) {
    out += digits[c >> 4];
    out += digits[c & 15];
  }
  return out;
}

std::string from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw Error(ErrorKind::tool_exception, std::string("invalid hex digit '") + c + "'");
  };
  if (hex.size() % 2 != 0) throw Error(ErrorKind::tool_exception, "hex string has odd length");
  std::string out;
  for (std::size_t i = 0; i < hex.size(); i += 2) out += static_cast<char>(nibble(hex[i]) * 16 + nibble(hex[i + 1]));
  return out;
}

std::string reverse_text(std::string_view text) { return {text.rbegin(), text.rend()}; }

const std::vector<std::pair<std::string, std::int64_t>>& price_catalog() {
  static const std::vector<std::pair<std::string, std::int64_t>> catalog{
      {"apple", 125}, {"bread", 349}, {"cheese", 780}, {"coffee", 899}, {"eggs", 275},
      {"honey", 660}, {"milk", 199},  {"pasta", 230},  {"rice", 450},   {"tea", 525}};
  return catalog;
}

std::int64_t unit_price(const std::string& item) {
  for (const auto& [name, price] : price_catalog()) {
    if (name == item) return price;
  }
  throw Error(ErrorKind::tool_exception, "unknown item '" + item + "'");
}

std::int64_t apply_discount(std::int64_t amount_cents, int percent) { return amount_cents * (100 - percent) / 100; }

std::int64_t add_tax(std::int64_t amount_cents, int percent) { return (amount_cents * (100 + percent) + 50) / 100; }

std::int64_t order_total(const TradeOrder& order) {
  std::int64_t subtotal = 0;
  for (const auto& [item, quantity] : order.lines) subtotal += unit_price(item) * quantity;
  return add_tax(apply_discount(subtotal, order.discount_percent), order.tax_percent);
}

GeneratedSuite message_decoder(int count, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorKind::config_error, "suite needs at least one task");
  const std::vector<ToolDescription> tools{
      tool("hex_to_text", "Decodes a hex string into UTF-8 text.", "hex_to_text(hex: str) -> str", "'hello'"),
      tool("reverse_text", "Reverses the characters of a string.", "reverse_text(text: str) -> str", "'olleh'"),
      tool("caesar_shift", "Shifts every ASCII letter forward by `shift` positions; use a negative shift to go back.",
           "caesar_shift(text: str, shift: int) -> str", "'khoor'"),
  };
  GeneratedSuite out;
  out.suite.suite_id = "message-decoder";
  bind_all(out.suite, tools);
  Draw draw(seed);
  for (int i = 1; i <= count; ++i) {
    const auto phrase = draw.pick(phrase_words()) + " " + draw.pick(phrase_words()) + " " + std::to_string(draw.between(10, 99));
    const int shift = draw.between(1, 25);
    const auto encoded = to_hex(reverse_text(caesar_shift(phrase, shift)));

    TaskSpec task;
    task.id = "decoder-" + two_digits(i);
    task.category = "message_decoder";
    task.query = "Message " + std::to_string(i) + ": the text '" + encoded +
                 "' was made by shifting every letter of the original message forward by " + std::to_string(shift) +
                 " places in the alphabet, reversing the result, and hex-encoding it. What is the original message?";
    task.tools = tools;
    task.checker = {CheckMode::keywords_all, {phrase}};
    out.suite.tasks.push_back(std::move(task));
    out.answers.push_back(phrase);
  }
  return out;
}

GeneratedSuite trade_calculator(int count, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorKind::config_error, "suite needs at least one task");
  const std::vector<ToolDescription> tools{
      tool("get_unit_price", "Unit price of a catalog item, in cents.", "get_unit_price(item: str) -> int", "349"),
      tool("line_total", "Price of `quantity` units, in cents.", "line_total(unit_price_cents: int, quantity: int) -> int",
           "1047"),
      tool("apply_discount", "Takes `percent` off an amount, rounding down to whole cents.",
           "apply_discount(amount_cents: int, percent: int) -> int", "942"),
      tool("add_tax", "Adds `rate_percent` tax to an amount, rounding half up to whole cents.",
           "add_tax(amount_cents: int, rate_percent: int) -> int", "1017"),
  };
  GeneratedSuite out;
  out.suite.suite_id = "trade-calculator";
  bind_all(out.suite, tools);
  json catalog = json::object();
  for (const auto& [item, price] : price_catalog()) catalog[item] = price;
  out.suite.data["prices_cents"] = catalog;

  Draw draw(seed);
  std::vector<std::string> items;
  for (const auto& entry : price_catalog()) items.push_back(entry.first);
  for (int i = 1; i <= count; ++i) {
    TradeOrder order;
    const int lines = draw.between(2, 3);
    std::vector<std::string> pool = items;
    for (int k = 0; k < lines; ++k) {
      const auto at = draw.below(pool.size());
      order.lines.emplace_back(pool[at], draw.between(1, 9));
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(at));
    }
    order.discount_percent = 5 * draw.between(0, 4);
    order.tax_percent = draw.between(3, 9);
    const auto total = order_total(order);

    std::string basket;
    for (std::size_t k = 0; k < order.lines.size(); ++k) {
      if (k > 0) basket += k + 1 == order.lines.size() ? " and " : ", ";
      basket += std::to_string(order.lines[k].second) + " " + order.lines[k].first;
    }
    TaskSpec task;
    task.id = "trade-" + two_digits(i);
    task.category = "trade_calculator";
    task.query = "Order " + std::to_string(i) + ": a customer buys " + basket + ". Take " +
                 std::to_string(order.discount_percent) + "% off the subtotal, then add " +
                 std::to_string(order.tax_percent) + "% sales tax. What is the final amount in cents?";
    task.tools = tools;
    task.checker = {CheckMode::keywords_all, {std::to_string(total)}};
    out.suite.tasks.push_back(std::move(task));
    out.answers.push_back(std::to_string(total));
  }
  return out;
}

GeneratedSuite api_chain(int count, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorKind::config_error, "suite needs at least one task");
  const std::vector<ToolDescription> tools{
      tool("get_user_token", "Logs a user in and returns an access token.",
           "get_user_token(username: str, password: str) -> dict", "{'token': '5f2b9c1e'}"),
      tool("query_balance", "Account balance for the token's owner.", "query_balance(token: str) -> dict",
           "{'balance': '1520.75', 'currency': 'USD'}"),
      tool("query_meeting", "Meetings booked by the token's owner on a date (YYYY-MM-DD).",
           "query_meeting(token: str, date: str) -> dict",
           "{'meetings': [{'topic': 'Budget review', 'time': '10:00', 'location': 'Room 2'}]}"),
  };
  static const std::vector<std::string> first{"alice", "bruno", "chen", "dara", "emil", "fatima", "goran", "hana",
                                              "ivan",  "jules", "kofi", "lena", "mateo", "nadia", "omar", "priya"};
  static const std::vector<std::string> topics{"Budget review", "Design sync", "Hiring panel", "Quarterly plan",
                                               "Vendor call"};
  static const std::vector<std::string> rooms{"Room 2", "Room 5", "Atrium", "Library", "Lab B", "Room 11"};

  GeneratedSuite out;
  out.suite.suite_id = "api-chain";
  bind_all(out.suite, tools);
  Draw draw(seed);

  const int user_count = std::max(4, (count + 1) / 2);
  json users = json::array();
  struct User {
    std::string name, password, balance, date, location;
  };
  std::vector<User> table;
  for (int u = 0; u < user_count; ++u) {
    User user;
    user.name = first[static_cast<std::size_t>(u) % first.size()] +
                (u >= static_cast<int>(first.size()) ? std::to_string(u / static_cast<int>(first.size())) : "");
    user.password = "pw" + std::to_string(draw.between(1000, 9999));
    user.balance = cents_text(draw.between(1000, 999999));
    user.date = "2024-05-" + two_digits(draw.between(1, 28));
    user.location = draw.pick(rooms);
    const auto token = to_hex(user.name).substr(0, 8);
    users.push_back({{"username", user.name},
                     {"password", user.password},
                     {"token", token},
                     {"balance", user.balance},
                     {"currency", "USD"},
                     {"meetings", json::array({{{"date", user.date},
                                                {"topic", draw.pick(topics)},
                                                {"time", two_digits(draw.between(8, 17)) + ":00"},
                                                {"location", user.location}}})}});
    table.push_back(std::move(user));
  }
  out.suite.data["users"] = users;

  for (int i = 1; i <= count; ++i) {
    const auto& user = table[static_cast<std::size_t>(i - 1) % table.size()];
    TaskSpec task;
    task.id = "api-" + two_digits(i);
    task.category = "api_chain";
    task.tools = tools;
    std::string answer;
    if (i % 2 == 1) {
      task.query = "Request " + std::to_string(i) + ": log in as " + user.name + " (password " + user.password +
                   ") and tell me the account balance.";
      answer = user.balance;
    } else {
      task.query = "Request " + std::to_string(i) + ": log in as " + user.name + " (password " + user.password +
                   ") and find where the meeting on " + user.date + " takes place.";
      answer = user.location;
    }
    task.checker = {CheckMode::keywords_all, {answer}};
    out.suite.tasks.push_back(std::move(task));
    out.answers.push_back(answer);
  }
  return out;
}

WebSuite toy_web(int count, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorKind::config_error, "suite needs at least one task");
  static const std::vector<std::string> given{"Ada", "Boris", "Clara", "Dmitri", "Elena", "Felix", "Greta", "Hugo",
                                              "Irene", "Jonas", "Karin", "Luis"};
  static const std::vector<std::string> family{"Moreau", "Okafor", "Lindqvist", "Tanaka", "Rossi", "Novak",
                                               "Haddad", "Keller"};
  static const std::vector<std::string> fields{"swarm robotics", "tactile sensing", "motion planning",
                                               "legged locomotion", "soft actuators", "robot learning"};
  const std::vector<ToolDescription> tools{
      tool("view", "Shows the first screen of the current page.", "view() -> str",
           "'Welcome to the lab.\\nClickable \\'people\\'\\n'"),
      tool("scroll_down", "Shows the next screen of the current page.", "scroll_down() -> str"),
      tool("click_url", "Opens the page behind a clickable name and shows its first screen.",
           "click_url(name: str) -> str"),
      tool("go_to_previous_page", "Goes back to the previous page and shows its first screen.",
           "go_to_previous_page() -> str"),
      tool("next_action", "Reads the whole current page and decides the next browsing step.",
           "next_action(query: str, current_page: str, visited: list) -> tuple",
           "(\"click_url('people')\", 'Welcome to the lab. ...')"),
      tool("res_handler", "Asks a language model to summarize or extract from text.", "res_handler(prompt: str) -> str",
           "'The email address is ada.moreau@northfield.example.'"),
  };

  WebSuite out;
  auto& suite = out.generated.suite;
  suite.suite_id = "toy-web";
  bind_all(suite, tools);
  suite.data["site"] = "sites/toy-web";

  Draw draw(seed);
  const int people = std::max(count, 6);
  if (people > static_cast<int>(given.size() * family.size())) {
    throw Error(ErrorKind::config_error, "toy-web suite supports at most " +
                                             std::to_string(given.size() * family.size()) + " tasks");
  }
  struct Person {
    std::string slug, name, email, office, field;
  };
  std::vector<Person> staff;
  std::set<std::string> taken;
  for (int p = 0; p < people; ++p) {
    const auto& g = given[static_cast<std::size_t>(p) % given.size()];
    std::string f;
    do {
      f = family[draw.below(family.size())];
    } while (!taken.insert(g + " " + f).second);
    Person person;
    person.name = g + " " + f;
    person.slug = "person-" + text::to_lower(g) + "-" + text::to_lower(f);
    person.email = text::to_lower(g) + "." + text::to_lower(f) + "@northfield.example";
    person.office = "Building " + std::string(1, static_cast<char>('A' + draw.below(4))) + ", room " +
                    std::to_string(draw.between(100, 399));
    person.field = draw.pick(fields);
    staff.push_back(std::move(person));
  }

  auto& site = out.site;
  site.current = "index";
  site.pages["index"] = {"Northfield Robotics Lab\nWe build robots that work next to people.\nClickable 'people'\n"
                         "Clickable 'projects'\nClickable 'news'\n"};
  std::vector<std::string> listing;
  std::string segment = "People\n";
  for (std::size_t p = 0; p < staff.size(); ++p) {
    segment += staff[p].name + ": Clickable '" + staff[p].slug + "'\n";
    if ((p + 1) % 4 == 0 && p + 1 < staff.size()) {
      listing.push_back(segment);
      segment.clear();
    }
  }
  listing.push_back(segment);
  site.pages["people"] = listing;
  for (const auto& person : staff) {
    site.pages[person.slug] = {person.name + "\n" + person.name + " works on " + person.field + ".\n",
                               "Contact\nEmail: " + person.email + "\nOffice: " + person.office + "\n"};
  }
  site.pages["projects"] = {"Projects\nWe run projects on " + fields[0] + ", " + fields[2] + " and " + fields[4] +
                            ".\n"};
  site.pages["news"] = {"News\nThe lab open day is in June.\n"};

  for (int i = 1; i <= count; ++i) {
    const auto& person = staff[static_cast<std::size_t>(i - 1)];
    TaskSpec task;
    task.id = "web-" + two_digits(i);
    task.category = "toy_web";
    task.tools = tools;
    std::string answer;
    if (i % 3 == 0) {
      task.query = "Lookup " + std::to_string(i) + ": which office is " + person.name +
                   " in, according to the lab website?";
      answer = person.office;
    } else {
      task.query = "Lookup " + std::to_string(i) + ": what is the email address of " + person.name +
                   " on the lab website?";
      answer = person.email;
    }
    task.checker = {CheckMode::keywords_all, {answer}};
    suite.tasks.push_back(std::move(task));
    out.generated.answers.push_back(answer);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

ExecutionOutcome behavior_outcome(Behavior behavior, const std::string& answer, const std::string& wrong) {
  ExecutionOutcome outcome;
  outcome.duration_ms = 0;
  switch (behavior) {
    case Behavior::correct:
      outcome.status = OutcomeStatus::ok;
      outcome.value = answer;
      outcome.stdout_text = answer + "\n";
      break;
    case Behavior::wrong:
      outcome.status = OutcomeStatus::ok;
      outcome.value = wrong;
      outcome.stdout_text = wrong + "\n";
      break;
    case Behavior::exception:
      outcome.status = OutcomeStatus::exception;
      outcome.stderr_text = "Traceback (most recent call last):\n  File \"<node>\", line 2, in <module>\nKeyError: 'total'";
      break;
    case Behavior::empty:
      outcome.status = OutcomeStatus::empty;
      break;
    case Behavior::timeout:
      outcome.status = OutcomeStatus::timeout;
      outcome.stderr_text = "execution exceeded the time limit";
      break;
    case Behavior::unparseable:
      outcome.status = OutcomeStatus::parse_failure;
      break;
  }
  return outcome;
}

bool succeeds(Behavior behavior) { return behavior == Behavior::correct || behavior == Behavior::wrong; }

void check_queries(const SuiteFile& suite) {
  for (const auto& a : suite.tasks) {
    for (const auto& b : suite.tasks) {
      if (a.id != b.id && b.query.find(a.query) != std::string::npos) {
        throw Error(ErrorKind::config_error, "query of '" + a.id + "' is contained in the query of '" + b.id + "'");
      }
    }
  }
}

const TaskSpec& task_of(const SuiteFile& suite, const std::string& id) {
  const auto* task = suite.find(id);
  if (task == nullptr) throw Error(ErrorKind::config_error, "no task '" + id + "' in suite " + suite.suite_id);
  return *task;
}

}  // namespace

ScriptedBundle script_tree_runs(const SuiteFile& suite, const std::vector<TreeScript>& scripts,
                                const std::vector<std::string>& answers) {
  if (scripts.size() != answers.size()) throw Error(ErrorKind::config_error, "one answer per script is required");
  check_queries(suite);
  ScriptedBundle bundle;
  for (std::size_t s = 0; s < scripts.size(); ++s) {
    const auto& script = scripts[s];
    const auto& task = task_of(suite, script.task_id);
    const auto& answer = answers[s];
    if (normalize_answer(answer) == normalize_answer(script.wrong_answer)) {
      throw Error(ErrorKind::config_error, "wrong answer collides with the answer for '" + task.id + "'");
    }

    // Replay the stop rule to find the successes the tree will collect.
    std::vector<std::string> values;
    for (const auto& layer : script.layers) {
      bool any_failed = false;
      for (auto behavior : layer) {
        if (behavior == Behavior::correct) values.push_back(answer);
        if (behavior == Behavior::wrong) values.push_back(script.wrong_answer);
        any_failed = any_failed || !succeeds(behavior);
      }
      if (!any_failed) break;
    }
    if (!values.empty()) {
      const auto right = std::count(values.begin(), values.end(), answer);
      const auto wrong = static_cast<std::ptrdiff_t>(values.size()) - right;
      const bool answer_wins = right > wrong || (right == wrong && values.front() == answer);
      bundle.transcript.entries.push_back({MatcherKind::substring, "final answer to the user's query: " + task.query,
                                           "The final answer is " + (answer_wins ? answer : script.wrong_answer) + ".",
                                           1, false});
    }

    for (std::size_t l = 0; l < script.layers.size(); ++l) {
      for (std::size_t m = 0; m < script.layers[l].size(); ++m) {
        const auto behavior = script.layers[l][m];
        const auto marker = "# node " + task.id + " " + make_node_id(static_cast<int>(l + 1), static_cast<int>(m + 1));
        std::string response;
        if (behavior == Behavior::unparseable) {
          response = "I am not sure how to solve this yet.";
        } else {
          response = format_tagged("Call the tools in order and print the final result.",
                                   marker + "\nresult = solve(" + json(task.id).dump() + ")\nprint(result)");
          bundle.script_table.entries.push_back(
              {CodeMatch::substring, marker + "\n", behavior_outcome(behavior, answer, script.wrong_answer)});
        }
        bundle.transcript.entries.push_back({MatcherKind::substring, task.query, response, 1, false});
      }
    }
  }
  return bundle;
}

ScriptedBundle script_codeact_runs(const SuiteFile& suite, const std::vector<BaselineScript>& scripts,
                                   const std::vector<std::string>& answers) {
  if (scripts.size() != answers.size()) throw Error(ErrorKind::config_error, "one answer per script is required");
  check_queries(suite);
  ScriptedBundle bundle;
  for (std::size_t s = 0; s < scripts.size(); ++s) {
    const auto& script = scripts[s];
    const auto& task = task_of(suite, script.task_id);
    for (std::size_t k = 0; k < script.steps.size(); ++k) {
      const auto& step = script.steps[k];
      std::string response;
      switch (step.kind) {
        case StepScript::Kind::solve:
          response = "<thought>I have what I need.</thought>\n<solution>The answer is " +
                     (step.correct ? answers[s] : script.wrong_answer) + ".</solution>";
          break;
        case StepScript::Kind::ramble:
          response = "<thought>Let me reconsider the problem before running anything.</thought>";
          break;
        case StepScript::Kind::run: {
          const auto marker = "# step " + task.id + " " + std::to_string(k + 1);
          response = format_tagged("Run the next tool call and inspect its output.",
                                   marker + "\nstep_result = next_step()\nprint(step_result)");
          bundle.script_table.entries.push_back(
              {CodeMatch::substring, marker + "\n", behavior_outcome(step.behavior, answers[s], script.wrong_answer)});
          break;
        }
      }
      bundle.transcript.entries.push_back({MatcherKind::substring, task.query, response, 1, false});
    }
  }
  return bundle;
}

ComparisonFixture comparison_fixture() {
  auto generated = trade_calculator(12, 2024);
  ComparisonFixture fixture;
  fixture.suite = generated.suite;
  fixture.suite.suite_id = "comparison";
  fixture.answers = generated.answers;

  using B = Behavior;
  const std::vector<std::vector<std::vector<B>>> trees{
      {{B::correct, B::correct, B::correct}},
      {{B::correct, B::correct, B::correct}},
      {{B::correct, B::correct, B::correct}},
      {{B::correct, B::correct, B::correct}},
      {{B::correct, B::correct, B::correct}},
      {{B::correct, B::wrong, B::correct}},  // 2:1 vote
      {{B::exception, B::empty, B::unparseable}, {B::correct, B::correct, B::correct}},
      {{B::timeout, B::exception, B::exception}, {B::correct, B::correct, B::correct}},
      {{B::exception, B::exception, B::exception}, {B::correct, B::empty, B::exception}, {B::correct, B::correct, B::correct}},
      {{B::correct, B::exception, B::correct}, {B::correct, B::correct, B::correct}},
      {{B::exception, B::empty, B::exception}, {B::exception, B::timeout, B::empty}, {B::unparseable, B::exception, B::empty}},
      {{B::wrong, B::wrong, B::wrong}},
  };
  using S = StepScript;
  const S run_ok{S::Kind::run, B::correct, true};
  const S run_fail{S::Kind::run, B::exception, true};
  const S solve_right{S::Kind::solve, B::correct, true};
  const S solve_wrong{S::Kind::solve, B::correct, false};
  const std::vector<S> stuck(kDefaultMaxSteps, run_fail);
  const std::vector<std::vector<S>> steps{
      {run_ok, run_ok, solve_right},
      {run_ok, run_ok, solve_right},
      {run_fail, run_ok, solve_right},
      {run_ok, run_ok, solve_right},
      {run_ok, run_fail, run_ok, solve_right},
      {run_ok, solve_right},
      {run_ok, run_fail, solve_wrong},
      {run_fail, run_fail, solve_wrong},
      stuck,
      stuck,
      {run_fail, solve_wrong},
      {run_ok, {S::Kind::ramble, B::correct, true}, solve_wrong},
  };

  std::vector<TreeScript> tree_scripts;
  std::vector<BaselineScript> step_scripts;
  for (std::size_t i = 0; i < fixture.suite.tasks.size(); ++i) {
    const auto& id = fixture.suite.tasks[i].id;
    tree_scripts.push_back({id, trees[i], "7"});
    step_scripts.push_back({id, steps[i], "7"});
  }
  fixture.toc = script_tree_runs(fixture.suite, tree_scripts, fixture.answers);
  fixture.codeact = script_codeact_runs(fixture.suite, step_scripts, fixture.answers);
  return fixture;
}

TurnFixture turn_fixture(const std::vector<int>& stop_layers, int width) {
  if (width < 1) throw Error(ErrorKind::config_error, "width must be >= 1");
  const auto generated = trade_calculator(static_cast<int>(stop_layers.size()), 99);
  TurnFixture fixture;
  fixture.suite = generated.suite;
  std::vector<TreeScript> scripts;
  for (std::size_t i = 0; i < stop_layers.size(); ++i) {
    if (stop_layers[i] < 1) throw Error(ErrorKind::config_error, "stop layer must be >= 1");
    TreeScript script{fixture.suite.tasks[i].id, {}, "7"};
    for (int l = 1; l <= stop_layers[i]; ++l) {
      std::vector<Behavior> layer(static_cast<std::size_t>(width), Behavior::correct);
      if (l < stop_layers[i]) layer.front() = Behavior::exception;
      script.layers.push_back(std::move(layer));
    }
    scripts.push_back(std::move(script));
  }
  fixture.bundle = script_tree_runs(fixture.suite, scripts, generated.answers);
  return fixture;
}

ScriptedBundle oracle_bundle(const GeneratedSuite& generated, int width) {
  std::vector<TreeScript> scripts;
  for (const auto& task : generated.suite.tasks) {
    scripts.push_back({task.id, {std::vector<Behavior>(static_cast<std::size_t>(width), Behavior::correct)}, "[no answer]"});
  }
  return script_tree_runs(generated.suite, scripts, generated.answers);
}

}  // namespace toc::suites
