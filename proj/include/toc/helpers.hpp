#pragma once

// Built-in helper tools that keep generated programs end to end:
// res_handler hands tool output to a model for summarization, and
// next_action picks the next browsing step from page content. A small
// in-memory browser backs next_action in tests and in the web suite.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "toc/gateway.hpp"

namespace toc {

inline constexpr std::size_t kHelperPromptLimit = 20'000;
inline constexpr std::string_view kBottomMarker = "[Reached the bottom of the page.]\n";

// Truncates `prompt` to 20,000 characters and makes one helper_tool call.
// An empty prompt or a gateway failure is raised as tool_exception.
std::string res_handler(std::string_view prompt, Gateway& gateway, const std::string& model_id,
                        double temperature = 0.1);

// Every `Clickable '<name>'` target in document order, duplicates kept.
std::vector<std::string> extract_clickable(std::string_view page);

struct BrowserState {
  // url -> scroll segments; a page's text is the concatenation of its
  // segments.
  std::map<std::string, std::vector<std::string>> pages;
  std::string current;
  std::vector<std::string> history_stack;
  std::size_t scroll_cursor = 0;
};

class ToyBrowser {
 public:
  explicit ToyBrowser(BrowserState state);

  // First segment of the current page; resets the scroll position.
  std::string view();
  // Next segment, or the bottom marker once the page is exhausted.
  std::string scroll_down();
  // Throws tool_exception for an unknown page.
  std::string click_url(std::string_view name);
  // Pops the history stack; stays on the current page when it is empty.
  std::string go_to_previous_page();

  const BrowserState& state() const { return state_; }
  std::string page_text(const std::string& url) const;

 private:
  BrowserState state_;
};

// Site directory: one file per page, named "<page-id>.txt". Segments are
// separated by a line holding only "[scroll]". The start page is "index".
BrowserState load_toy_site(const std::filesystem::path& dir);
void save_toy_site(const BrowserState& site, const std::filesystem::path& dir);
inline constexpr std::string_view kSegmentSeparator = "[scroll]";

enum class BrowseAction { click_url, end, go_to_previous_page };

struct NextActionDecision {
  BrowseAction action = BrowseAction::end;
  // Exact action text, e.g. "click_url('team')" or "end()".
  std::string action_text;
  // Target for click_url with surrounding quotes removed.
  std::string target;
  std::string whole_page;
};

std::string next_action_prompt(std::string_view query, std::string_view whole_page,
                               const std::vector<std::string>& visited_on_page);

// Interprets a decision reply after the page has been read; applies the
// fallback overrides in order.
NextActionDecision decide_next_action(std::string_view reply, std::string whole_page,
                                      const std::vector<std::string>& not_visited);

NextActionDecision next_action(std::string_view query, std::string_view current_page,
                               const std::vector<std::string>& visited, Gateway& gateway, ToyBrowser& browser,
                               const std::string& model_id, double temperature = 0.1);

}  // namespace toc
