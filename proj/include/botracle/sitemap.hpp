#pragma once

#include <map>
#include <string>
#include <vector>

#include "botracle/hit.hpp"

namespace botracle {

/// Static site structure the simulator walks.
struct SiteMap {
    struct Page {
        std::string pagename;
        PageType page_type = PageType::other;
    };

    std::vector<Page> pages;
    std::map<std::string, std::vector<std::string>> links;  // pagename -> outgoing
    std::vector<std::string> entry_pages;

    bool contains(const std::string& pagename) const;
    PageType type_of(const std::string& pagename) const;
    const std::vector<std::string>& links_from(const std::string& pagename) const;

    /// Throws std::invalid_argument when a link endpoint or entry page is
    /// missing, or fewer than 2 pages exist.
    void validate() const;

    /// Display title derived from the pagename (underscores become spaces).
    static std::string title_of(const std::string& pagename);
};

/// Built-in 40-page store: categories, products, search, cart, checkout and
/// editorial pages, wired the way a small shop would be.
const SiteMap& default_store();

}  // namespace botracle
