#include "verienv/reference_env.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "verienv/digest.hpp"
#include "verienv/rng.hpp"

using nlohmann::json;

namespace verienv {

namespace {

const char* kAdjectives[] = {
    "amber",   "birch",   "cedar",   "dover",   "elm",     "fulton",
    "granite", "harbor",  "ivy",     "juniper", "kestrel", "lakeside",
    "maple",   "norfolk", "oakwood", "preston", "quarry",  "ridge",
    "sterling", "tremont", "union",   "vista",   "willow",  "york",
};

const char* kNouns[] = {
    "court",  "commons", "place",   "lofts",  "heights", "gardens",
    "square", "terrace", "station", "row",    "crossing", "park",
};

std::string title_case(std::string s) {
  bool start = true;
  for (char& c : s) {
    if (start && c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    start = (c == ' ');
  }
  return s;
}

// "2938.00": dollars, two decimals, no separators. The SDK-facing form.
std::string dollars_plain(int64_t cents) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld.%02lld",
                static_cast<long long>(cents / 100),
                static_cast<long long>(cents % 100));
  return buf;
}

// "$2,938.00": the rendered form. Normalization maps it back to the plain one.
std::string dollars_rendered(int64_t cents) {
  std::string whole = std::to_string(cents / 100);
  std::string grouped;
  int count = 0;
  for (auto it = whole.rbegin(); it != whole.rend(); ++it) {
    if (count && count % 3 == 0) grouped.push_back(',');
    grouped.push_back(*it);
    ++count;
  }
  std::reverse(grouped.begin(), grouped.end());
  char frac[8];
  std::snprintf(frac, sizeof(frac), ".%02lld", static_cast<long long>(cents % 100));
  return "$" + grouped + frac;
}

std::string rating_string(int tenths) {
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

}  // namespace

const std::vector<std::string>& listing_categories() {
  static const std::vector<std::string> cats = {
      "apartment", "condo", "studio", "loft", "townhouse", "cottage"};
  return cats;
}

const char* to_string(ElementRole role) {
  switch (role) {
    case ElementRole::link: return "link";
    case ElementRole::button: return "button";
    case ElementRole::textbox: return "textbox";
    case ElementRole::option: return "option";
    case ElementRole::text: return "text";
  }
  return "?";
}

std::string PageSnapshot::to_json() const {
  json doc;
  doc["url"] = url;
  doc["elements"] = json::array();
  for (const auto& e : elements) {
    json je;
    je["element_id"] = e.element_id;
    je["role"] = to_string(e.role);
    je["label"] = e.label;
    if (e.value) je["value"] = *e.value;
    doc["elements"].push_back(std::move(je));
  }
  return doc.dump();
}

const PageElement* PageSnapshot::find(int element_id) const {
  for (const auto& e : elements) {
    if (e.element_id == element_id) return &e;
  }
  return nullptr;
}

std::string BrowserAction::to_json() const {
  json doc;
  switch (kind) {
    case Kind::navigate:
      doc["action"] = "navigate";
      doc["url"] = url;
      break;
    case Kind::click:
      doc["action"] = "click";
      doc["element_id"] = element_id;
      break;
    case Kind::type:
      doc["action"] = "type";
      doc["element_id"] = element_id;
      doc["text"] = text;
      break;
    case Kind::submit:
      doc["action"] = "submit";
      doc["element_id"] = element_id;
      break;
    case Kind::answer:
      doc["action"] = "answer";
      doc["text"] = text;
      break;
  }
  return doc.dump();
}

BrowserAction BrowserAction::from_json(const std::string& raw) {
  json doc = json::parse(raw, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("action")) {
    throw Error(ErrorCode::bad_argument, "malformed browser action");
  }
  std::string kind = doc["action"].get<std::string>();
  BrowserAction a;
  if (kind == "navigate") {
    a.kind = Kind::navigate;
    a.url = doc.value("url", "/");
  } else if (kind == "click") {
    a.kind = Kind::click;
    a.element_id = doc.value("element_id", 0);
  } else if (kind == "type") {
    a.kind = Kind::type;
    a.element_id = doc.value("element_id", 0);
    a.text = doc.value("text", "");
  } else if (kind == "submit") {
    a.kind = Kind::submit;
    a.element_id = doc.value("element_id", 0);
  } else if (kind == "answer") {
    a.kind = Kind::answer;
    a.text = doc.value("text", "");
  } else {
    throw Error(ErrorCode::bad_argument, "unknown action kind '" + kind + "'");
  }
  return a;
}

BrowserAction BrowserAction::navigate_to(std::string url) {
  BrowserAction a;
  a.kind = Kind::navigate;
  a.url = std::move(url);
  return a;
}
BrowserAction BrowserAction::click_on(int element_id) {
  BrowserAction a;
  a.kind = Kind::click;
  a.element_id = element_id;
  return a;
}
BrowserAction BrowserAction::type_into(int element_id, std::string text) {
  BrowserAction a;
  a.kind = Kind::type;
  a.element_id = element_id;
  a.text = std::move(text);
  return a;
}
BrowserAction BrowserAction::submit_form(int element_id) {
  BrowserAction a;
  a.kind = Kind::submit;
  a.element_id = element_id;
  return a;
}
BrowserAction BrowserAction::answer_with(std::string text) {
  BrowserAction a;
  a.kind = Kind::answer;
  a.text = std::move(text);
  return a;
}

ReferenceEnv::ReferenceEnv(uint64_t seed) : seed_(seed) { populate(); }

void ReferenceEnv::reset() {
  listings_.clear();
  accounts_.clear();
  contact_messages_.clear();
  token_counter_ = 0;
  populate();
}

void ReferenceEnv::reset_with_seed(uint64_t seed) {
  seed_ = seed;
  reset();
}

void ReferenceEnv::populate() {
  SplitMix64 rng(seed_);
  const auto& cats = listing_categories();
  constexpr size_t n_adj = std::size(kAdjectives);
  constexpr size_t n_noun = std::size(kNouns);

  std::set<std::string> used;
  for (int id = 1; id <= kListingCount; ++id) {
    Listing l;
    l.id = id;
    do {
      l.name = title_case(std::string(kAdjectives[rng.next() % n_adj]) + " " +
                          kNouns[rng.next() % n_noun]);
    } while (!used.insert(l.name).second);
    l.price_cents = static_cast<int64_t>(rng.next_in(50000, 500000));
    l.category = cats[rng.next() % cats.size()];
    l.rating = static_cast<int>(rng.next_in(10, 50));
    l.review_count = static_cast<int>(rng.next() % 500);
    listings_.push_back(std::move(l));
  }

  for (const char* name : {"alice", "bob", "carol", "dave", "erin"}) {
    UserAccount a;
    a.username = name;
    a.password = std::string(name) + "123";
    a.password_digest = sha256_hex(a.password);
    accounts_.push_back(std::move(a));
  }
}

std::string ReferenceEnv::canonical_state() const {
  // Tables in name order: accounts, contact_messages, listings.
  std::ostringstream out;
  auto sorted_accounts = accounts_;
  std::sort(sorted_accounts.begin(), sorted_accounts.end(),
            [](const UserAccount& a, const UserAccount& b) { return a.username < b.username; });
  for (const auto& a : sorted_accounts) {
    out << "accounts|" << a.username << "|favorites=";
    bool first = true;
    for (int id : a.favorites) {
      if (!first) out << ",";
      out << id;
      first = false;
    }
    out << ";password_digest=" << a.password_digest << ";username=" << a.username
        << "\n";
  }
  int mi = 1;
  for (const auto& m : contact_messages_) {
    out << "contact_messages|" << mi++ << "|message=" << m.message
        << ";name=" << m.name << "\n";
  }
  for (const auto& l : listings_) {
    out << "listings|" << l.id << "|category=" << l.category << ";name=" << l.name
        << ";price_cents=" << l.price_cents << ";rating=" << l.rating
        << ";review_count=" << l.review_count << "\n";
  }
  return out.str();
}

std::string ReferenceEnv::state_hash() const { return sha256_hex(canonical_state()); }

std::vector<const Listing*> ReferenceEnv::filtered_sorted(
    const std::string& sort, const std::string& category) const {
  std::vector<const Listing*> rows;
  for (const auto& l : listings_) {
    if (category.empty() || category == "all" || l.category == category) {
      rows.push_back(&l);
    }
  }
  if (sort == "price_asc") {
    std::stable_sort(rows.begin(), rows.end(), [](const Listing* a, const Listing* b) {
      return a->price_cents != b->price_cents ? a->price_cents < b->price_cents
                                              : a->id < b->id;
    });
  } else if (sort == "price_desc") {
    std::stable_sort(rows.begin(), rows.end(), [](const Listing* a, const Listing* b) {
      return a->price_cents != b->price_cents ? a->price_cents > b->price_cents
                                              : a->id < b->id;
    });
  }
  return rows;
}

namespace {

// Minimal query-string parsing for the fixed route table.
std::map<std::string, std::string> parse_query(const std::string& url,
                                               std::string* path_out) {
  std::map<std::string, std::string> q;
  auto qpos = url.find('?');
  *path_out = url.substr(0, qpos);
  if (qpos == std::string::npos) return q;
  std::string rest = url.substr(qpos + 1);
  size_t pos = 0;
  while (pos < rest.size()) {
    size_t amp = rest.find('&', pos);
    std::string pair = rest.substr(pos, amp == std::string::npos ? std::string::npos
                                                                 : amp - pos);
    auto eq = pair.find('=');
    if (eq != std::string::npos) {
      q[pair.substr(0, eq)] = pair.substr(eq + 1);
    } else if (!pair.empty()) {
      q[pair] = "";
    }
    if (amp == std::string::npos) break;
    pos = amp + 1;
  }
  return q;
}

struct SnapshotBuilder {
  PageSnapshot snap;
  int next_id = 1;

  void add(ElementRole role, std::string label,
           std::optional<std::string> value = std::nullopt) {
    snap.elements.push_back({next_id++, role, std::move(label), std::move(value)});
  }
};

}  // namespace

const UserAccount* ReferenceEnv::account_by_token(
    const std::optional<std::string>& token) const {
  if (!token) return nullptr;
  for (const auto& a : accounts_) {
    if (a.session_token && *a.session_token == *token) return &a;
  }
  return nullptr;
}

UserAccount* ReferenceEnv::account_by_token(const std::optional<std::string>& token) {
  return const_cast<UserAccount*>(
      static_cast<const ReferenceEnv*>(this)->account_by_token(token));
}

PageSnapshot ReferenceEnv::render(const std::string& url, const Session& session) const {
  std::string path;
  auto query = parse_query(url, &path);
  SnapshotBuilder b;
  b.snap.url = url;
  const UserAccount* user = account_by_token(session.token);

  if (path == "/") {
    b.add(ElementRole::text, "welcome to verienv listings");
    b.add(ElementRole::link, "browse listings", "/listings");
    b.add(ElementRole::link, "log in", "/login");
    b.add(ElementRole::link, "sign up", "/signup");
    b.add(ElementRole::link, "favorites", "/account/favorites");
    b.add(ElementRole::link, "contact us", "/contact");
    if (user) b.add(ElementRole::text, "logged in as " + user->username);
  } else if (path == "/listings") {
    std::string sort = query.count("sort") ? query["sort"] : "";
    std::string category = query.count("category") ? query["category"] : "all";
    int page = 1;
    if (query.count("page")) page = std::max(1, std::atoi(query["page"].c_str()));
    auto rows = filtered_sorted(sort, category);
    int pages = std::max<int>(1, static_cast<int>((rows.size() + kPageSize - 1) / kPageSize));
    b.add(ElementRole::text, "listings page " + std::to_string(page) + " of " +
                                 std::to_string(pages));
    size_t start = static_cast<size_t>(page - 1) * kPageSize;
    for (size_t i = start; i < rows.size() && i < start + kPageSize; ++i) {
      const Listing* l = rows[i];
      b.add(ElementRole::link, l->name, "/listings/" + std::to_string(l->id));
      b.add(ElementRole::text, l->name + " " + dollars_rendered(l->price_cents) +
                                   " per month");
    }
    for (const auto& c : listing_categories()) {
      b.add(ElementRole::option, c, "/listings?category=" + c);
    }
    std::string base = "/listings?sort=" + sort + "&category=" + category + "&page=";
    if (page > 1) b.add(ElementRole::link, "previous page", base + std::to_string(page - 1));
    if (page < pages) b.add(ElementRole::link, "next page", base + std::to_string(page + 1));
  } else if (path.rfind("/listings/", 0) == 0) {
    int id = std::atoi(path.substr(10).c_str());
    const Listing* found = nullptr;
    for (const auto& l : listings_) {
      if (l.id == id) found = &l;
    }
    if (!found) {
      b.add(ElementRole::text, "404 not found");
    } else {
      b.add(ElementRole::text, found->name);
      b.add(ElementRole::text, dollars_rendered(found->price_cents) + " per month");
      b.add(ElementRole::text, "category " + found->category);
      b.add(ElementRole::text, "rated " + rating_string(found->rating) + " from " +
                                   std::to_string(found->review_count) + " reviews");
      if (user) {
        bool fav = user->favorites.count(found->id) > 0;
        b.add(ElementRole::button, fav ? "remove from favorites" : "add to favorites");
      } else {
        b.add(ElementRole::text, "log in to save favorites");
      }
      b.add(ElementRole::link, "back to listings", "/listings");
    }
  } else if (path == "/login") {
    b.add(ElementRole::textbox, "username");
    b.add(ElementRole::textbox, "password");
    b.add(ElementRole::button, "log in");
    if (session.flash) b.add(ElementRole::text, *session.flash);
  } else if (path == "/signup") {
    b.add(ElementRole::textbox, "username");
    b.add(ElementRole::textbox, "password");
    b.add(ElementRole::button, "sign up");
    if (session.flash) b.add(ElementRole::text, *session.flash);
  } else if (path == "/account/favorites") {
    if (!user) {
      b.add(ElementRole::text, "please log in to view favorites");
      b.add(ElementRole::link, "log in", "/login");
    } else {
      b.add(ElementRole::text, std::to_string(user->favorites.size()) +
                                   " favorites saved");
      for (int id : user->favorites) {
        for (const auto& l : listings_) {
          if (l.id == id) {
            b.add(ElementRole::link, l.name, "/listings/" + std::to_string(id));
          }
        }
      }
    }
  } else if (path == "/contact") {
    b.add(ElementRole::textbox, "name");
    b.add(ElementRole::textbox, "message");
    b.add(ElementRole::button, "send");
    if (session.flash) b.add(ElementRole::text, *session.flash);
  } else {
    b.add(ElementRole::text, "404 not found");
  }
  return b.snap;
}

ReferenceEnv::ActionOutcome ReferenceEnv::apply_action(const BrowserAction& action,
                                                       Session& session) {
  ActionOutcome out;
  PageSnapshot current = render(session.current_url, session);

  auto input_for = [&](const char* label) -> std::string {
    for (const auto& e : current.elements) {
      if (e.role == ElementRole::textbox && e.label == label) {
        auto it = session.input_values.find(e.element_id);
        if (it != session.input_values.end()) return it->second;
      }
    }
    return "";
  };

  auto do_submit = [&]() {
    std::string path;
    auto query = parse_query(session.current_url, &path);
    (void)query;
    if (path == "/login") {
      std::string u = input_for("username");
      std::string p = input_for("password");
      bool ok = false;
      for (auto& a : accounts_) {
        if (a.username == u && a.password_digest == sha256_hex(p)) {
          a.session_token = "tok-" + std::to_string(++token_counter_);
          session.token = a.session_token;
          session.username = u;
          ok = true;
        }
      }
      session.input_values.clear();
      session.flash = ok ? "logged in as " + u : "invalid credentials";
      if (ok) session.current_url = "/";
    } else if (path == "/signup") {
      std::string u = input_for("username");
      std::string p = input_for("password");
      bool exists = false;
      for (const auto& a : accounts_) exists = exists || a.username == u;
      if (u.empty() || p.empty() || exists) {
        session.flash = "signup failed";
      } else {
        UserAccount a;
        a.username = u;
        a.password = p;
        a.password_digest = sha256_hex(p);
        accounts_.push_back(std::move(a));
        session.flash = "account created";
      }
      session.input_values.clear();
    } else if (path == "/contact") {
      contact_messages_.push_back({input_for("name"), input_for("message")});
      session.input_values.clear();
      session.flash = "message sent";
    } else {
      out.invalid_element = true;
    }
  };

  switch (action.kind) {
    case BrowserAction::Kind::navigate:
      session.current_url = action.url;
      session.input_values.clear();
      session.flash.reset();
      break;
    case BrowserAction::Kind::answer:
      out.terminal_answer = action.text;
      break;
    case BrowserAction::Kind::type: {
      const PageElement* el = current.find(action.element_id);
      if (!el || el->role != ElementRole::textbox) {
        out.invalid_element = true;
      } else {
        session.input_values[action.element_id] = action.text;
      }
      break;
    }
    case BrowserAction::Kind::click: {
      const PageElement* el = current.find(action.element_id);
      if (!el) {
        out.invalid_element = true;
        break;
      }
      if ((el->role == ElementRole::link || el->role == ElementRole::option) && el->value) {
        session.current_url = *el->value;
        session.input_values.clear();
        session.flash.reset();
      } else if (el->role == ElementRole::button) {
        if (el->label == "add to favorites" || el->label == "remove from favorites") {
          UserAccount* user = account_by_token(session.token);
          std::string path;
          parse_query(session.current_url, &path);
          int id = path.rfind("/listings/", 0) == 0 ? std::atoi(path.substr(10).c_str()) : 0;
          if (!user || id <= 0) {
            out.invalid_element = true;
          } else if (el->label == "add to favorites") {
            user->favorites.insert(id);
          } else {
            user->favorites.erase(id);
          }
        } else {
          do_submit();
        }
      } else {
        out.invalid_element = true;
      }
      break;
    }
    case BrowserAction::Kind::submit: {
      const PageElement* el = current.find(action.element_id);
      if (!el || (el->role != ElementRole::button && el->role != ElementRole::textbox)) {
        out.invalid_element = true;
      } else {
        do_submit();
      }
      break;
    }
  }

  out.snapshot = render(session.current_url, session);
  return out;
}

const std::vector<std::string>& ReferenceEnv::sdk_vocabulary() {
  static const std::vector<std::string> v = {
      "list_listings",    "get_listing",  "count_listings", "favorites_count",
      "min_price",        "contact_messages_count",         "user_exists"};
  return v;
}

std::string ReferenceEnv::sdk_query(const SdkCall& call) const {
  auto arg = [&](const char* name, const char* def = "") -> std::string {
    auto it = call.args.find(name);
    return it != call.args.end() ? it->second : def;
  };

  auto listing_json = [](const Listing& l) {
    json j;
    j["id"] = l.id;
    j["name"] = l.name;
    j["price_cents"] = l.price_cents;
    j["price"] = dollars_plain(l.price_cents);
    j["category"] = l.category;
    j["rating"] = rating_string(l.rating);
    j["review_count"] = l.review_count;
    return j;
  };

  if (call.name == "list_listings") {
    std::string sort = arg("sort");
    std::string category = arg("category", "all");
    long limit = std::strtol(arg("limit", "0").c_str(), nullptr, 10);
    auto rows = filtered_sorted(sort, category);
    json arr = json::array();
    for (const auto* l : rows) {
      if (limit > 0 && static_cast<long>(arr.size()) >= limit) break;
      arr.push_back(listing_json(*l));
    }
    return arr.dump();
  }
  if (call.name == "get_listing") {
    int id = std::atoi(arg("id").c_str());
    for (const auto& l : listings_) {
      if (l.id == id) return listing_json(l).dump();
    }
    throw Error(ErrorCode::bad_argument, "get_listing: no listing with id " + arg("id"));
  }
  if (call.name == "count_listings") {
    std::string category = arg("category", "all");
    return std::to_string(filtered_sorted("", category).size());
  }
  if (call.name == "favorites_count") {
    std::string u = arg("username");
    for (const auto& a : accounts_) {
      if (a.username == u) return std::to_string(a.favorites.size());
    }
    throw Error(ErrorCode::bad_argument, "favorites_count: unknown user " + u);
  }
  if (call.name == "min_price") {
    int64_t best = -1;
    for (const auto& l : listings_) {
      if (best < 0 || l.price_cents < best) best = l.price_cents;
    }
    return best < 0 ? "" : dollars_plain(best);
  }
  if (call.name == "contact_messages_count") {
    return std::to_string(contact_messages_.size());
  }
  if (call.name == "user_exists") {
    std::string u = arg("username");
    for (const auto& a : accounts_) {
      if (a.username == u) return "true";
    }
    return "false";
  }
  throw Error(ErrorCode::bad_argument, "unknown sdk call '" + call.name + "'");
}

void ReferenceEnv::corrupt_listing_name(int id, const std::string& name) {
  for (auto& l : listings_) {
    if (l.id == id) l.name = name;
  }
}

}  // namespace verienv
