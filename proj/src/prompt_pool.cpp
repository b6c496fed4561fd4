#include "toc/prompt.hpp"

namespace toc {

std::string_view reflection_instruction() {
  return "Based on the provided chat history, reflect on the code and its execution. Identify potential issues or "
         "areas for optimization and provide specific suggestions to refine and improve the code. Consider edge "
         "cases, efficiency, and clarity in your reflections.";
}

std::string_view evolution_instruction() {
  return "In order to guide the diversity of results and enhance the performance through ensemble methods, we need "
         "to increase the diversity of prompts. We diversify the current prompt while maintaining consistency in "
         "core content, aiming for orthogonal expressions or prompts that lead to different directions and divergent "
         "thinking.";
}

namespace {

constexpr const char* kRootBody =
    "You are a helpful assistant assigned with the task of problem-solving. To achieve this, you will be using an "
    "interactive coding environment equipped with a variety of tool functions to assist you throughout the "
    "process.\n\n"
    "At each turn, you should first provide your step-by-step thinking for solving the task, for example: <thought> "
    "I need to print \"hello world!\"</thought>. After that, you can Interact with a Python programming environment "
    "and receive the corresponding output. Your code should be enclosed using \"<execute>\" tag, for example: "
    "<execute> print(\"Hello World!\") </execute>.\n\n"
    "You can use the following functions:\n{toolset_descs}\n. Ensure the code matches the fn_signature and "
    "input-output formats for proper execution.\n"
    "Here's the chat history for your reference:\n{chat_history}\n\n"
    "History End:\n"
    "User's Query:\n{query}\nYour Thought And Code:\n";

constexpr const char* kUsageExampleBody =
    "You are a helpful assistant assigned with the task of problem-solving. You work in an interactive Python "
    "environment where a set of tool functions is already imported for you.\n\n"
    "First analyze the query and break it into steps, writing your plan inside <thought></thought>. Then write ONE "
    "complete program that carries out the whole plan and prints the final answer, inside <execute></execute>.\n\n"
    "Usage example:\n"
    "<thought> The user wants the total cost of 3 shares. I will fetch the price with get_price, multiply it by "
    "the share count and print the result.</thought>\n"
    "<execute>\n"
    "price = get_price(\"ACME\")\n"
    "total = price * 3\n"
    "print(total)\n"
    "</execute>\n\n"
    "Available functions:\n{toolset_descs}\n"
    "Call every function exactly as its fn_signature states and read its output in the format shown.\n\n"
    "Chat history:\n{chat_history}\n\n"
    "History End:\n"
    "User's Query:\n{query}\nYour Thought And Code:\n";

constexpr const char* kFormattedBody =
    "ROLE\n"
    "    You are a careful problem solver working in a Python environment with tool functions.\n"
    "\n"
    "OUTPUT FORMAT\n"
    "    1. Step-by-step reasoning for the whole task:\n"
    "           <thought> ... </thought>\n"
    "    2. A single, complete program that solves the task end to end and prints the answer:\n"
    "           <execute> ... </execute>\n"
    "\n"
    "TOOLS\n"
    "{toolset_descs}\n"
    "\n"
    "    Match each fn_signature and its input-output format exactly.\n"
    "\n"
    "CHAT HISTORY\n"
    "{chat_history}\n"
    "\n"
    "History End.\n"
    "\n"
    "USER'S QUERY\n"
    "    {query}\n"
    "\n"
    "Your Thought And Code:\n";

constexpr const char* kReorderedBody =
    "User's Query:\n{query}\n\n"
    "Earlier attempts and their execution results (empty on the first attempt):\n{chat_history}\n"
    "History End.\n\n"
    "You are an assistant that solves the query above by writing code. If earlier attempts failed, use their "
    "errors to correct your plan instead of repeating it.\n\n"
    "Functions you may call:\n{toolset_descs}\n\n"
    "Answer with your step-by-step plan in <thought></thought> followed by the complete program in "
    "<execute></execute>. The program must print the final answer.\n";

constexpr const char* kApiNoteBody =
    "You can use the following functions:\n{toolset_descs}\n\n"
    "Note:\n"
    "The outputs produced by the tool will be formatted like a JSON dictionary.\n"
    "For example, 'result = {'api_name': 'QueryMeeting', 'input': {'user_name': 'John'}, 'output': {'meetings': "
    "[{'meeting_id': 1, 'meeting_name': 'Meeting with the client', 'meeting_time': '2021-01-01 10:00:00', "
    "'meeting_location': 'Room 1', 'meeting_attendees': ['John', 'Mary', 'Peter']}]}, 'exception': None}'\n"
    "Ensure that the code strictly adheres to the function descriptions and the input-output format provided.\n"
    "Navigate through the 'output' key correctly to retrieve results.\n"
    "If you encounter any unfamiliar formats, first print the structure to ensure proper handling in the future.\n"
    "Consistently focus on the user's request and attempt to produce the complete solution without needing "
    "multiple steps.\n\n"
    "You are a helpful assistant assigned with the task of problem-solving. Give your step-by-step thinking in "
    "<thought></thought>, then the complete code in <execute></execute>.\n\n"
    "Here's the chat history for your reference:\n{chat_history}\n\n"
    "History End:\n"
    "User's Query:\n{query}\nYour Thought And Code:\n";

constexpr const char* kWebExampleBody =
    "You are a helpful assistant assigned with the task of problem-solving through code.\n"
    "\n"
    "Here's the chat history for your reference:\n"
    "{chat_history}\n"
    "History End:\n"
    "\n"
    "You can use the following functions:\n"
    "{toolset_descs}\n"
    "\n"
    "Usage example for tasks whose answer depends on what a tool returns:\n"
    "<thought> I need the email of a person listed somewhere on the site. I will open the start page, let "
    "next_action decide where to go until the answer page is found, and extract the email with res_handler.\n"
    "</thought>\n"
    "<execute>\n"
    "page = view()\n"
    "visited = []\n"
    "for _ in range(30):\n"
    "    action, whole_page = next_action(query, page, visited)\n"
    "    if action == \"end()\":\n"
    "        print(res_handler(\"Extract the email from the following text: \" + whole_page))\n"
    "        break\n"
    "    if action.startswith(\"click_url\"):\n"
    "        url = action.split(\"(\")[1].split(\")\")[0].strip().strip(\"'\")\n"
    "        visited.append(url)\n"
    "        page = click_url(url)\n"
    "    else:\n"
    "        page = go_to_previous_page()\n"
    "</execute>\n"
    "\n"
    "Write the whole solution as one program; it must print the final answer.\n"
    "User's Query:\n"
    "{query}\n"
    "Your Thought And Code:\n";

}  // namespace

PromptTemplate root_template() { return {"root", kRootBody, Provenance::root}; }

PromptPool default_prompt_pool() {
  return PromptPool{{
      root_template(),
      {"usage-example", kUsageExampleBody, Provenance::hand_edited},
      {"formatted", kFormattedBody, Provenance::hand_edited},
      {"reordered", kReorderedBody, Provenance::hand_edited},
      {"api-note", kApiNoteBody, Provenance::hand_edited},
      {"web-example", kWebExampleBody, Provenance::hand_edited},
  }};
}

}  // namespace toc
