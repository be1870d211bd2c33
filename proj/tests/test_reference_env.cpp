#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>
#include <string>

#include "json.hpp"
#include "verienv/reference_env.hpp"

using namespace verienv;
using nlohmann::json;

namespace {

// Drives a login flow through the public action interface only.
bool login(ReferenceEnv& env, Session& session, const std::string& user,
           const std::string& password) {
  env.apply_action(BrowserAction::navigate_to("/login"), session);
  auto page = env.render("/login", session);
  int user_box = 0, pass_box = 0, button = 0;
  for (const auto& e : page.elements) {
    if (e.role == ElementRole::textbox && e.label == "username") user_box = e.element_id;
    if (e.role == ElementRole::textbox && e.label == "password") pass_box = e.element_id;
    if (e.role == ElementRole::button) button = e.element_id;
  }
  env.apply_action(BrowserAction::type_into(user_box, user), session);
  env.apply_action(BrowserAction::type_into(pass_box, password), session);
  env.apply_action(BrowserAction::submit_form(button), session);
  return session.token.has_value();
}

int find_element(const PageSnapshot& page, ElementRole role, const std::string& label) {
  for (const auto& e : page.elements) {
    if (e.role == role && e.label == label) return e.element_id;
  }
  return 0;
}

}  // namespace

TEST_CASE("populate produces the fixed shape") {
  ReferenceEnv env(42);
  CHECK(env.listings().size() == ReferenceEnv::kListingCount);
  CHECK(env.accounts().size() == 5);
  CHECK(env.contact_messages().empty());

  std::set<std::string> names;
  std::set<int> ids;
  for (const auto& l : env.listings()) {
    CHECK(names.insert(l.name).second);  // unique names
    CHECK(ids.insert(l.id).second);
    CHECK(l.price_cents >= 50000);
    CHECK(l.price_cents <= 500000);
    CHECK(l.rating >= 10);
    CHECK(l.rating <= 50);
    bool known_cat = false;
    for (const auto& c : listing_categories()) known_cat = known_cat || c == l.category;
    CHECK(known_cat);
  }
  CHECK(listing_categories().size() == 6);
}

TEST_CASE("same seed same database, different seed different database") {
  ReferenceEnv a(42), b(42), c(43);
  CHECK(a.canonical_state() == b.canonical_state());
  CHECK(a.state_hash() == b.state_hash());
  CHECK(a.state_hash() != c.state_hash());
  CHECK(a.state_hash().size() == 64);
}

TEST_CASE("reset restores the seeded state after mutations") {
  ReferenceEnv env(7);
  std::string initial = env.state_hash();
  Session s;
  REQUIRE(login(env, s, "alice", "alice123"));
  env.apply_action(BrowserAction::navigate_to("/listings/3"), s);
  auto page = env.render(s.current_url, s);
  int fav = find_element(page, ElementRole::button, "add to favorites");
  REQUIRE(fav != 0);
  env.apply_action(BrowserAction::click_on(fav), s);
  CHECK(env.state_hash() != initial);

  env.reset();
  CHECK(env.state_hash() == initial);

  env.reset_with_seed(8);
  CHECK(env.state_hash() != initial);
  env.reset_with_seed(7);
  CHECK(env.state_hash() == initial);
}

TEST_CASE("pagination covers every listing exactly once") {
  ReferenceEnv env(42);
  std::set<std::string> seen;
  int pages_visited = 0;
  Session s;
  std::string url = "/listings?sort=price_asc&category=all&page=1";
  while (true) {
    auto page = env.render(url, s);
    ++pages_visited;
    for (const auto& e : page.elements) {
      if (e.role == ElementRole::link && e.value &&
          e.value->rfind("/listings/", 0) == 0) {
        seen.insert(e.label);
      }
    }
    int next = find_element(page, ElementRole::link, "next page");
    if (!next) break;
    url = *page.find(next)->value;
  }
  CHECK(pages_visited == 6);
  CHECK(seen.size() == ReferenceEnv::kListingCount);
}

TEST_CASE("price sort is total and tie-broken by id") {
  ReferenceEnv env(42);
  SdkCall call{"list_listings", {{"sort", "price_asc"}, {"category", "all"}}, ""};
  auto rows = json::parse(env.sdk_query(call));
  REQUIRE(rows.size() == ReferenceEnv::kListingCount);
  for (size_t i = 1; i < rows.size(); ++i) {
    int64_t prev = rows[i - 1]["price_cents"].get<int64_t>();
    int64_t cur = rows[i]["price_cents"].get<int64_t>();
    CHECK(prev <= cur);
    if (prev == cur) {
      CHECK(rows[i - 1]["id"].get<int>() < rows[i]["id"].get<int>());
    }
  }

  SdkCall desc{"list_listings", {{"sort", "price_desc"}, {"category", "all"}}, ""};
  auto drows = json::parse(env.sdk_query(desc));
  CHECK(drows.front()["price_cents"].get<int64_t>() ==
        rows.back()["price_cents"].get<int64_t>());
}

TEST_CASE("agent-visible listing page agrees with the SDK") {
  ReferenceEnv env(42);
  Session s;
  auto page = env.render("/listings?sort=price_asc&category=all&page=1", s);
  SdkCall call{"list_listings",
               {{"sort", "price_asc"}, {"category", "all"}, {"limit", "1"}},
               ""};
  auto rows = json::parse(env.sdk_query(call));
  REQUIRE(rows.size() == 1);
  std::string cheapest = rows[0]["name"].get<std::string>();

  // First listing link on page 1 of the ascending sort is the cheapest.
  std::string first_link;
  for (const auto& e : page.elements) {
    if (e.role == ElementRole::link && e.value && e.value->rfind("/listings/", 0) == 0) {
      first_link = e.label;
      break;
    }
  }
  CHECK(first_link == cheapest);

  // Rendered price is the dollar form of the SDK's plain price.
  std::string plain = rows[0]["price"].get<std::string>();
  auto detail = env.render("/listings/" + std::to_string(rows[0]["id"].get<int>()), s);
  bool price_shown = false;
  for (const auto& e : detail.elements) {
    price_shown = price_shown || e.label.find(plain) != std::string::npos;
  }
  CHECK(price_shown);
}

TEST_CASE("category filter counts add up") {
  ReferenceEnv env(42);
  size_t total = 0;
  for (const auto& c : listing_categories()) {
    SdkCall call{"count_listings", {{"category", c}}, ""};
    total += std::stoul(env.sdk_query(call));
  }
  CHECK(total == ReferenceEnv::kListingCount);
  SdkCall all{"count_listings", {{"category", "all"}}, ""};
  CHECK(env.sdk_query(all) == std::to_string(ReferenceEnv::kListingCount));
}

TEST_CASE("login rejects bad credentials and accepts good ones") {
  ReferenceEnv env(42);
  Session bad;
  CHECK_FALSE(login(env, bad, "alice", "wrong"));
  CHECK(bad.flash == "invalid credentials");

  Session good;
  CHECK(login(env, good, "alice", "alice123"));
  CHECK(good.current_url == "/");
  CHECK(good.username == "alice");

  auto home = env.render("/", good);
  CHECK(find_element(home, ElementRole::text, "logged in as alice") != 0);
}

TEST_CASE("favorites require auth and round trip") {
  ReferenceEnv env(42);
  Session anon;
  env.apply_action(BrowserAction::navigate_to("/listings/5"), anon);
  auto page = env.render(anon.current_url, anon);
  CHECK(find_element(page, ElementRole::button, "add to favorites") == 0);
  CHECK(find_element(page, ElementRole::text, "log in to save favorites") != 0);

  Session s;
  REQUIRE(login(env, s, "bob", "bob123"));
  env.apply_action(BrowserAction::navigate_to("/listings/5"), s);
  page = env.render(s.current_url, s);
  int add = find_element(page, ElementRole::button, "add to favorites");
  REQUIRE(add != 0);
  env.apply_action(BrowserAction::click_on(add), s);

  SdkCall count{"favorites_count", {{"username", "bob"}}, ""};
  CHECK(env.sdk_query(count) == "1");

  page = env.render(s.current_url, s);
  int remove = find_element(page, ElementRole::button, "remove from favorites");
  REQUIRE(remove != 0);
  env.apply_action(BrowserAction::click_on(remove), s);
  CHECK(env.sdk_query(count) == "0");
}

TEST_CASE("sessions are isolated") {
  ReferenceEnv env(42);
  Session a, b;
  REQUIRE(login(env, a, "carol", "carol123"));
  CHECK_FALSE(b.token.has_value());
  auto fav_page = env.render("/account/favorites", b);
  CHECK(find_element(fav_page, ElementRole::text, "please log in to view favorites") != 0);
}

TEST_CASE("contact form appends a message") {
  ReferenceEnv env(42);
  Session s;
  env.apply_action(BrowserAction::navigate_to("/contact"), s);
  auto page = env.render("/contact", s);
  env.apply_action(
      BrowserAction::type_into(find_element(page, ElementRole::textbox, "name"), "dana"),
      s);
  env.apply_action(
      BrowserAction::type_into(find_element(page, ElementRole::textbox, "message"),
                               "hello there"),
      s);
  env.apply_action(
      BrowserAction::submit_form(find_element(page, ElementRole::button, "send")), s);
  REQUIRE(env.contact_messages().size() == 1);
  CHECK(env.contact_messages()[0].name == "dana");
  SdkCall count{"contact_messages_count", {}, ""};
  CHECK(env.sdk_query(count) == "1");
}

TEST_CASE("invalid element actions are flagged, valid ones are not") {
  ReferenceEnv env(42);
  Session s;
  env.apply_action(BrowserAction::navigate_to("/"), s);
  auto bad = env.apply_action(BrowserAction::click_on(999), s);
  CHECK(bad.invalid_element);
  auto text_click = env.apply_action(BrowserAction::click_on(1), s);  // text element
  CHECK(text_click.invalid_element);
  auto page = env.render("/", s);
  int link = find_element(page, ElementRole::link, "browse listings");
  auto good = env.apply_action(BrowserAction::click_on(link), s);
  CHECK_FALSE(good.invalid_element);
  CHECK(s.current_url == "/listings");
}

TEST_CASE("answer action terminates without touching state") {
  ReferenceEnv env(42);
  std::string before = env.state_hash();
  Session s;
  auto out = env.apply_action(BrowserAction::answer_with("the answer"), s);
  REQUIRE(out.terminal_answer.has_value());
  CHECK(*out.terminal_answer == "the answer");
  CHECK(env.state_hash() == before);
}

TEST_CASE("state hash is sensitive to single-field corruption") {
  ReferenceEnv env(42);
  std::string before = env.state_hash();
  env.corrupt_listing_name(12, "Tampered Name");
  CHECK(env.state_hash() != before);
  env.reset();
  CHECK(env.state_hash() == before);
}

TEST_CASE("sdk errors on unknown calls and ids") {
  ReferenceEnv env(42);
  CHECK_THROWS_AS(env.sdk_query({"bogus_call", {}, ""}), Error);
  CHECK_THROWS_AS(env.sdk_query({"get_listing", {{"id", "999"}}, ""}), Error);
  CHECK_THROWS_AS(env.sdk_query({"favorites_count", {{"username", "nobody"}}, ""}), Error);
  CHECK(env.sdk_query({"user_exists", {{"username", "alice"}}, ""}) == "true");
  CHECK(env.sdk_query({"user_exists", {{"username", "nobody"}}, ""}) == "false");
}

TEST_CASE("min_price matches the ascending sort head") {
  ReferenceEnv env(42);
  SdkCall mp{"min_price", {}, ""};
  SdkCall head{"list_listings", {{"sort", "price_asc"}, {"limit", "1"}}, ""};
  auto rows = json::parse(env.sdk_query(head));
  CHECK(env.sdk_query(mp) == rows[0]["price"].get<std::string>());
}

TEST_CASE("browser action json round trips") {
  for (const auto& a :
       {BrowserAction::navigate_to("/listings"), BrowserAction::click_on(4),
        BrowserAction::type_into(2, "hi"), BrowserAction::submit_form(3),
        BrowserAction::answer_with("done")}) {
    auto back = BrowserAction::from_json(a.to_json());
    CHECK(back.to_json() == a.to_json());
  }
}

TEST_CASE("signup creates a usable account") {
  ReferenceEnv env(42);
  Session s;
  env.apply_action(BrowserAction::navigate_to("/signup"), s);
  auto page = env.render("/signup", s);
  env.apply_action(
      BrowserAction::type_into(find_element(page, ElementRole::textbox, "username"), "zoe"),
      s);
  env.apply_action(
      BrowserAction::type_into(find_element(page, ElementRole::textbox, "password"),
                               "zoe123"),
      s);
  env.apply_action(
      BrowserAction::submit_form(find_element(page, ElementRole::button, "sign up")), s);
  CHECK(env.sdk_query({"user_exists", {{"username", "zoe"}}, ""}) == "true");

  Session login_session;
  CHECK(login(env, login_session, "zoe", "zoe123"));
}
