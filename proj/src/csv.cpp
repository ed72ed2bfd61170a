#include "botracle/csv.hpp"

namespace botracle::csv {

bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    int c = in.get();
    if (c == EOF) return false;

    std::string field;
    bool quoted = false;
    bool any = false;
    while (true) {
        if (c == EOF) {
            fields.push_back(field);
            return true;
        }
        char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                int next = in.peek();
                if (next == '"') {
                    in.get();
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"' && field.empty() && !any) {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(field);
            field.clear();
            any = false;
            c = in.get();
            continue;
        } else if (ch == '\r') {
            if (in.peek() == '\n') in.get();
            fields.push_back(field);
            return true;
        } else if (ch == '\n') {
            fields.push_back(field);
            return true;
        } else {
            field.push_back(ch);
            any = true;
        }
        c = in.get();
    }
}

std::string escape_field(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

void write_record(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << escape_field(fields[i]);
    }
    out << '\n';
}

}  // namespace botracle::csv
