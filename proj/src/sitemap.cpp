#include "botracle/sitemap.hpp"

#include <algorithm>
#include <stdexcept>

namespace botracle {

bool SiteMap::contains(const std::string& pagename) const {
    return std::any_of(pages.begin(), pages.end(),
                       [&](const Page& p) { return p.pagename == pagename; });
}

PageType SiteMap::type_of(const std::string& pagename) const {
    for (const auto& p : pages)
        if (p.pagename == pagename) return p.page_type;
    return PageType::other;
}

const std::vector<std::string>& SiteMap::links_from(const std::string& pagename) const {
    static const std::vector<std::string> empty;
    auto it = links.find(pagename);
    return it == links.end() ? empty : it->second;
}

void SiteMap::validate() const {
    if (pages.size() < 2) throw std::invalid_argument("sitemap needs at least 2 pages");
    if (entry_pages.empty()) throw std::invalid_argument("sitemap needs entry pages");
    for (const auto& e : entry_pages)
        if (!contains(e)) throw std::invalid_argument("entry page not in sitemap: " + e);
    for (const auto& [from, targets] : links) {
        if (!contains(from)) throw std::invalid_argument("link source not in sitemap: " + from);
        for (const auto& to : targets)
            if (!contains(to)) throw std::invalid_argument("link target not in sitemap: " + to);
    }
}

std::string SiteMap::title_of(const std::string& pagename) {
    std::string title = pagename;
    std::replace(title.begin(), title.end(), '_', ' ');
    return title;
}

namespace {

SiteMap build_default_store() {
    SiteMap sm;
    auto add = [&](const std::string& name, PageType t) { sm.pages.push_back({name, t}); };

    add("home", PageType::other);

    const std::vector<std::string> categories = {
        "category_shoes", "category_shirts", "category_hats", "category_accessories"};
    for (const auto& c : categories) add(c, PageType::category);

    const std::map<std::string, std::vector<std::string>> catalog = {
        {"category_shoes",
         {"product_running_shoes", "product_leather_boots", "product_canvas_sneakers",
          "product_hiking_boots", "product_sandals", "product_dress_shoes"}},
        {"category_shirts",
         {"product_linen_shirt", "product_flannel_shirt", "product_polo_shirt",
          "product_graphic_tee", "product_oxford_shirt", "product_henley_shirt"}},
        {"category_hats",
         {"product_baseball_cap", "product_wool_beanie", "product_sun_hat",
          "product_fedora", "product_bucket_hat", "product_trucker_cap"}},
        {"category_accessories",
         {"product_leather_belt", "product_canvas_tote", "product_wool_scarf",
          "product_silver_watch", "product_card_wallet", "product_travel_backpack"}}};
    for (const auto& [cat, prods] : catalog)
        for (const auto& p : prods) add(p, PageType::product);

    add("search", PageType::search);
    add("cart", PageType::cart);
    add("checkout", PageType::checkout);

    const std::vector<std::string> editorial = {
        "about_us", "contact", "faq", "shipping_info", "returns_policy",
        "size_guide", "blog_summer_trends", "blog_care_tips"};
    for (const auto& e : editorial) add(e, PageType::content);

    auto link = [&](const std::string& from, const std::vector<std::string>& tos) {
        auto& v = sm.links[from];
        v.insert(v.end(), tos.begin(), tos.end());
    };

    link("home", categories);
    link("home", {"search", "cart", "about_us", "contact", "blog_summer_trends", "blog_care_tips"});
    for (const auto& [cat, prods] : catalog) {
        link(cat, prods);
        link(cat, {"home", "search"});
        for (const auto& other : categories)
            if (other != cat) link(cat, {other});
        for (std::size_t i = 0; i < prods.size(); ++i) {
            const std::string& p = prods[i];
            link(p, {cat, "cart", "home", "search"});
            link(p, {prods[(i + 1) % prods.size()], prods[(i + 2) % prods.size()]});
        }
    }
    // Search reaches the whole catalog.
    for (const auto& [cat, prods] : catalog) {
        link("search", {cat});
        link("search", prods);
    }
    link("search", {"home"});
    link("cart", {"checkout", "home", "search"});
    link("checkout", {"home"});
    for (const auto& e : editorial) link(e, {"home"});
    link("about_us", {"contact"});
    link("faq", {"shipping_info", "returns_policy"});
    link("size_guide", {"category_shoes", "category_shirts"});
    link("blog_summer_trends", {"product_sun_hat", "product_sandals", "product_linen_shirt"});
    link("blog_care_tips", {"product_leather_boots", "product_wool_scarf"});

    sm.entry_pages = {"home", "search",
                      "category_shoes", "category_shirts", "category_hats",
                      "category_accessories",
                      "product_running_shoes", "product_linen_shirt",
                      "product_baseball_cap", "product_silver_watch",
                      "blog_summer_trends", "blog_care_tips"};

    sm.validate();
    return sm;
}

}  // namespace

const SiteMap& default_store() {
    static const SiteMap store = build_default_store();
    return store;
}

}  // namespace botracle
