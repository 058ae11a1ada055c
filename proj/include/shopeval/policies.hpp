#pragma once

#include <memory>
#include <set>
#include <string>

#include "shopeval/runtime.hpp"

namespace shopeval {

// Deterministic text-in/text-out baseline policies. They read only the
// rendered prompts, mirroring what a chat model would see.
//   no_tools          final immediately, empty report
//   search_only       one search, then finalize from the ranked list
//   search_substitute search wide, prune substitutes, finalize kept
//   search_complement search, expand complements of the top hit, finalize
//   full_tools        infer task mode, then the full search/expand/prune flow
//   oracle            test-only upper bound; reads the hidden targets
std::unique_ptr<Policy> make_scripted_policy(const std::string& name);

// The oracle needs the hidden target set and is refused outside test mode.
std::unique_ptr<Policy> make_oracle_policy(const std::set<std::string>& targets,
                                           bool test_mode);

struct ChatEndpointConfig {
    std::string host = "127.0.0.1";
    int port = 80;
    std::string path = "/v1/chat/completions";
    std::string model = "default";
    std::string api_key;  // empty: no auth header
    double timeout_seconds = 120.0;
    size_t max_retries = 3;
    double backoff_seconds = 0.5;
};

// Remote chat-completion client with bounded exponential-backoff retries and
// request/response logging surfaced through take_log().
std::unique_ptr<Policy> make_chat_policy(const ChatEndpointConfig& cfg);

}  // namespace shopeval
