#include "uniqshap/csv.hpp"

#include <stdexcept>

namespace uniqshap::csv {

std::vector<Record> parse(std::istream& in) {
    std::vector<Record> records;
    Record record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;  // anything seen on the current record
    std::size_t line = 1;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
        field_started = false;
    };

    char c = 0;
    while (in.get(c)) {
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') {
                    ++line;
                }
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty()) {
                    throw std::runtime_error("csv: stray quote inside unquoted field on line " +
                                             std::to_string(line));
                }
                in_quotes = true;
                field_started = true;
                break;
            case ',':
                end_field();
                field_started = true;
                break;
            case '\r':
                if (in.peek() != '\n') {
                    field.push_back(c);
                }
                break;
            case '\n':
                end_record();
                ++line;
                break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (in_quotes) {
        throw std::runtime_error("csv: unterminated quoted field at end of input");
    }
    if (field_started || !field.empty()) {
        end_record();
    }
    return records;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_record(std::ostream& out, const Record& record) {
    for (std::size_t i = 0; i < record.size(); ++i) {
        if (i > 0) {
            out << ',';
        }
        out << escape(record[i]);
    }
    out << '\n';
}

}  // namespace uniqshap::csv
