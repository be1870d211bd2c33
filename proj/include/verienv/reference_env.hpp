#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "verienv/errors.hpp"

namespace verienv {

struct Listing {
  int id = 0;
  std::string name;
  int64_t price_cents = 0;
  std::string category;
  int rating = 10;        // tenths, 10..50
  int review_count = 0;
};

struct UserAccount {
  std::string username;
  std::string password;         // plaintext kept for the login form fixture
  std::string password_digest;  // sha256 hex
  std::set<int> favorites;
  std::optional<std::string> session_token;
};

struct ContactMessage {
  std::string name;
  std::string message;
};

enum class ElementRole { link, button, textbox, option, text };
const char* to_string(ElementRole role);

struct PageElement {
  int element_id = 0;
  ElementRole role = ElementRole::text;
  std::string label;
  std::optional<std::string> value;
};

struct PageSnapshot {
  std::string url;
  std::vector<PageElement> elements;

  std::string to_json() const;
  const PageElement* find(int element_id) const;
};

struct BrowserAction {
  enum class Kind { navigate, click, type, submit, answer };
  Kind kind = Kind::navigate;
  std::string url;     // navigate
  int element_id = 0;  // click/type/submit
  std::string text;    // type/answer

  std::string to_json() const;
  static BrowserAction from_json(const std::string& raw);
  static BrowserAction navigate_to(std::string url);
  static BrowserAction click_on(int element_id);
  static BrowserAction type_into(int element_id, std::string text);
  static BrowserAction submit_form(int element_id);
  static BrowserAction answer_with(std::string text);
};

struct SdkCall {
  std::string name;
  std::map<std::string, std::string> args;
  std::string bind_as;  // empty when the result is not bound
};

// Per-episode browser session: current URL, pending form input, auth token.
struct Session {
  std::string current_url = "/";
  std::map<int, std::string> input_values;  // element_id -> typed text
  std::optional<std::string> token;
  std::optional<std::string> username;
  std::optional<std::string> flash;  // one-shot status line shown on forms
};

// The deterministic built-in synthetic website. One instance serves one
// episode at a time; all rendering and queries are pure functions of
// (database state, session).
class ReferenceEnv {
 public:
  static constexpr int kListingCount = 60;
  static constexpr int kPageSize = 10;

  explicit ReferenceEnv(uint64_t seed);

  // Regenerates the seeded database; favorites and contact messages cleared.
  void reset();
  // Reset under a different seed (models a reset that loses the seed).
  void reset_with_seed(uint64_t seed);

  uint64_t seed() const { return seed_; }

  // Canonical serialization of the database: tables sorted by name, rows by
  // primary key, fields by name, one record per line, UTF-8.
  std::string canonical_state() const;
  std::string state_hash() const;

  PageSnapshot render(const std::string& url, const Session& session) const;

  struct ActionOutcome {
    PageSnapshot snapshot;           // page after the action
    std::optional<std::string> terminal_answer;
    bool invalid_element = false;    // action was a no-op failed step
  };
  ActionOutcome apply_action(const BrowserAction& action, Session& session);

  // State-access interface used by validators and probe collection only.
  std::string sdk_query(const SdkCall& call) const;
  static const std::vector<std::string>& sdk_vocabulary();

  const std::vector<Listing>& listings() const { return listings_; }
  const std::vector<UserAccount>& accounts() const { return accounts_; }
  const std::vector<ContactMessage>& contact_messages() const { return contact_messages_; }

  // Test hook: direct mutation to exercise hash sensitivity.
  void corrupt_listing_name(int id, const std::string& name);

 private:
  void populate();
  PageSnapshot render_listings(const std::string& url, const Session& session) const;
  PageSnapshot render_listing_detail(int id, const Session& session) const;
  std::vector<const Listing*> filtered_sorted(const std::string& sort,
                                              const std::string& category) const;
  UserAccount* account_by_token(const std::optional<std::string>& token);
  const UserAccount* account_by_token(const std::optional<std::string>& token) const;

  uint64_t seed_;
  std::vector<Listing> listings_;
  std::vector<UserAccount> accounts_;
  std::vector<ContactMessage> contact_messages_;
  uint64_t token_counter_ = 0;
};

const std::vector<std::string>& listing_categories();

}  // namespace verienv
