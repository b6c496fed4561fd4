#include "toc/helpers.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "toc/error.hpp"
#include "toc/text.hpp"

namespace toc {

namespace fs = std::filesystem;

std::string res_handler(std::string_view prompt, Gateway& gateway, const std::string& model_id, double temperature) {
  if (prompt.empty()) throw Error(ErrorKind::tool_exception, "res_handler: prompt is empty");
  CompletionRequest request{model_id, std::string(text::utf8_prefix_chars(prompt, kHelperPromptLimit)), temperature,
                            RequestTag::helper_tool};
  try {
    return gateway.complete(request);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config_error) throw;
    throw Error(ErrorKind::tool_exception, std::string("res_handler: ") + e.what());
  }
}

std::vector<std::string> extract_clickable(std::string_view page) {
  static const std::regex pattern("Clickable '([^']*)'");
  std::vector<std::string> names;
  const std::string text(page);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), pattern); it != std::sregex_iterator(); ++it) {
    names.push_back((*it)[1].str());
  }
  return names;
}

ToyBrowser::ToyBrowser(BrowserState state) : state_(std::move(state)) {
  if (!state_.pages.contains(state_.current)) {
    throw Error(ErrorKind::config_error, "browser start page '" + state_.current + "' does not exist");
  }
}

std::string ToyBrowser::view() {
  const auto& segments = state_.pages.at(state_.current);
  state_.scroll_cursor = 1;
  return segments.empty() ? std::string{} : segments.front();
}

std::string ToyBrowser::scroll_down() {
  const auto& segments = state_.pages.at(state_.current);
  if (state_.scroll_cursor < segments.size()) return segments[state_.scroll_cursor++];
  return std::string(kBottomMarker);
}

std::string ToyBrowser::click_url(std::string_view name) {
  const std::string target(name);
  if (!state_.pages.contains(target)) throw Error(ErrorKind::tool_exception, "click_url: no page '" + target + "'");
  state_.history_stack.push_back(state_.current);
  state_.current = target;
  return view();
}

std::string ToyBrowser::go_to_previous_page() {
  if (!state_.history_stack.empty()) {
    state_.current = state_.history_stack.back();
    state_.history_stack.pop_back();
  }
  return view();
}

std::string ToyBrowser::page_text(const std::string& url) const {
  std::string out;
  for (const auto& segment : state_.pages.at(url)) out += segment;
  return out;
}

BrowserState load_toy_site(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::config_error, "toy site directory not found: " + dir.string());
  BrowserState site;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    std::vector<std::string> segments(1);
    for (std::string line; std::getline(in, line);) {
      if (line == kSegmentSeparator) {
        segments.emplace_back();
        continue;
      }
      segments.back() += line + "\n";
    }
    site.pages[entry.path().stem().string()] = std::move(segments);
  }
  if (!site.pages.contains("index")) throw Error(ErrorKind::config_error, "toy site has no index page");
  site.current = "index";
  return site;
}

void save_toy_site(const BrowserState& site, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  for (const auto& [url, segments] : site.pages) {
    std::ofstream out(dir / (url + ".txt"));
    if (!out) throw Error(ErrorKind::io_error, "cannot write page " + url);
    for (std::size_t i = 0; i < segments.size(); ++i) {
      if (i > 0) out << kSegmentSeparator << "\n";
      out << segments[i];
    }
  }
}

std::string next_action_prompt(std::string_view query, std::string_view whole_page,
                               const std::vector<std::string>& visited_on_page) {
  const std::string format =
      "<thought>your thought of your decision</thought>\n<action>click_url(specific_url) or end() or "
      "not_found()</action>";
  std::string prompt = "You are viewing page contents, the content is: \n";
  prompt += whole_page;
  prompt += "\n You should make decision on the next step. given user query ";
  prompt += query;
  prompt +=
      ", you have the following options, please follow the output format. \n1. end(): it means current user query "
      "can be answered by current page content. \n2. click_url(URL): it means current user query should be checked "
      "by clicking one of the urls shown on the current page content for more details. specify the detailed url "
      "into URL field.\n";
  if (visited_on_page.empty()) {
    prompt += "Please visit any Clickable urls as many as possible that has not been visited. \n";
    prompt +=
        "3. not_found(): it means that current page does not contain answer for current query and all Clickable "
        "URLS have been clicked. \n";
  } else {
    std::string visited_list;
    for (const auto& url : visited_on_page) {
      if (!visited_list.empty()) visited_list += ", ";
      visited_list += "'" + url + "'";
    }
    prompt +=
        "3. not_found(): it means that current page does not contain answer for current query and all Clickable "
        "URLS have been clicked. \n";
    prompt += "Remember that you have visited the url list [" + visited_list +
              "]. You are not allowed to visit the urls you have visited. Please visit any Clickable urls as many "
              "as possible that has not been visited.\n";
  }
  prompt += "Your output format: " + format + "\n\nYour Output:\n";
  return prompt;
}

namespace {

std::string click_target(const std::string& action_text) {
  const auto open = action_text.find('(');
  const auto close = action_text.find(')', open == std::string::npos ? 0 : open);
  if (open == std::string::npos) return {};
  auto inner = std::string(text::trim(std::string_view(action_text).substr(
      open + 1, (close == std::string::npos ? action_text.size() : close) - open - 1)));
  inner.erase(std::remove_if(inner.begin(), inner.end(), [](char c) { return c == '\'' || c == '"'; }), inner.end());
  return inner;
}

NextActionDecision make_decision(BrowseAction action, std::string text, std::string whole_page) {
  NextActionDecision decision;
  decision.action = action;
  decision.action_text = std::move(text);
  if (action == BrowseAction::click_url) decision.target = click_target(decision.action_text);
  decision.whole_page = std::move(whole_page);
  return decision;
}

}  // namespace

NextActionDecision decide_next_action(std::string_view reply, std::string whole_page,
                                      const std::vector<std::string>& not_visited) {
  const std::string result(reply);
  const bool has_end = result.find("end()") != std::string::npos;

  if (whole_page.find("Clickable") == std::string::npos && !has_end) {
    return make_decision(BrowseAction::go_to_previous_page, "go_to_previous_page()", std::move(whole_page));
  }
  if (!has_end && not_visited.empty()) {
    return make_decision(BrowseAction::go_to_previous_page, "go_to_previous_page()", std::move(whole_page));
  }
  if (result.find("click_url") != std::string::npos) {
    static const std::regex quoted(R"(click_url\('.*'\))");
    static const std::regex loose(R"(click_url\(.*\))");
    std::smatch match;
    if (std::regex_search(result, match, quoted) || std::regex_search(result, match, loose)) {
      return make_decision(BrowseAction::click_url, match.str(), std::move(whole_page));
    }
  } else if (has_end) {
    return make_decision(BrowseAction::end, "end()", std::move(whole_page));
  } else if (result.find("not_found()") != std::string::npos) {
    return make_decision(BrowseAction::go_to_previous_page, "go_to_previous_page()", std::move(whole_page));
  }
  return make_decision(BrowseAction::end, "end()", std::move(whole_page));
}

NextActionDecision next_action(std::string_view query, std::string_view current_page,
                               const std::vector<std::string>& visited, Gateway& gateway, ToyBrowser& browser,
                               const std::string& model_id, double temperature) {
  std::set<std::string> sanitized;
  for (const auto& url : visited) {
    std::string clean = url;
    clean.erase(std::remove_if(clean.begin(), clean.end(), [](char c) { return c == '\'' || c == '"'; }),
                clean.end());
    sanitized.insert(std::move(clean));
  }

  std::string whole_page(current_page);
  for (;;) {
    auto segment = browser.scroll_down();
    if (segment == kBottomMarker) break;
    whole_page += segment;
  }

  std::vector<std::string> not_visited;
  std::vector<std::string> highlighted;
  for (auto& url : extract_clickable(whole_page)) {
    (sanitized.contains(url) ? highlighted : not_visited).push_back(std::move(url));
  }

  const auto prompt = next_action_prompt(query, whole_page, highlighted);
  std::string reply;
  try {
    reply = gateway.complete({model_id, std::string(text::utf8_prefix_chars(prompt, kHelperPromptLimit)),
                              temperature, RequestTag::helper_tool});
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config_error) throw;
    throw Error(ErrorKind::tool_exception, std::string("next_action: ") + e.what());
  }
  return decide_next_action(reply, std::move(whole_page), not_visited);
}

}  // namespace toc
