#include <potsys/error.hpp>
#include <potsys/text_format.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace potsys {

namespace {

struct Token
{
    enum class Kind
    {
        Ident,
        Number,
        String,
        Punct,
        End
    };

    Kind kind;
    std::string text;
    std::size_t offset;
};

auto tokenize(std::string_view text) -> std::vector<Token>
{
    std::vector<Token> out;
    std::size_t i = 0;
    auto ident_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '\'';
    };
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '#') {
            while (i < text.size() && text[i] != '\n')
                ++i;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            auto start = i;
            while (i < text.size() && ident_char(text[i]))
                ++i;
            out.push_back({Token::Kind::Ident, std::string(text.substr(start, i - start)), start});
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            auto start = i;
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
                ++i;
            out.push_back({Token::Kind::Number, std::string(text.substr(start, i - start)), start});
        } else if (c == '"') {
            auto start = i++;
            while (i < text.size() && text[i] != '"' && text[i] != '\n')
                ++i;
            if (i >= text.size() || text[i] != '"')
                throw SyntaxError("unterminated string at offset " + std::to_string(start), start);
            out.push_back({Token::Kind::String, std::string(text.substr(start + 1, i - start - 1)), start});
            ++i;
        } else if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
            out.push_back({Token::Kind::Punct, "->", i});
            i += 2;
        } else if (std::string_view("{}()[]:;,").find(c) != std::string_view::npos) {
            out.push_back({Token::Kind::Punct, std::string(1, c), i});
            ++i;
        } else {
            throw SyntaxError("unexpected character '" + std::string(1, c) + "' at offset " + std::to_string(i), i);
        }
    }
    out.push_back({Token::Kind::End, "", text.size()});
    return out;
}

struct RawEntry
{
    std::string symbol;
    bool is_constant = false;
    std::vector<Tuple> tuples;
    Elem value = 0;
    std::size_t offset = 0;
};

struct RawStructure
{
    std::string name;
    std::size_t offset = 0;
    std::optional<std::vector<Elem>> universe;
    std::vector<RawEntry> entries;
};

struct RawArrow
{
    std::string src;
    std::string dst;
    std::vector<ElementMap::Pair> pairs;
    std::size_t offset = 0;
};

struct RawFile
{
    std::optional<Signature> signature;
    std::vector<RawStructure> structures;
    std::optional<std::string> system_name;
    std::vector<RawArrow> arrows;
    bool close = true;
};

class Reader
{
public:
    Reader(std::string_view text, std::filesystem::path base_dir, RawFile & out) :
        _text(text),
        _tokens(tokenize(text)),
        _base(std::move(base_dir)),
        _out(out)
    {
    }

    auto read_file() -> void
    {
        while (peek().kind != Token::Kind::End) {
            auto & t = expect_ident("'signature', 'structure' or 'system'");
            if (t.text == "signature")
                read_signature();
            else if (t.text == "structure")
                _out.structures.push_back(read_structure());
            else if (t.text == "system")
                read_system(t);
            else
                fail(t, "expected 'signature', 'structure' or 'system', got '" + t.text + "'");
        }
    }

private:
    [[noreturn]] auto fail(const Token & t, const std::string & message) const -> void
    {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < t.offset && i < _text.size(); ++i) {
            if (_text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        auto where = t.kind == Token::Kind::End ? std::string("end of input")
                                                 : "line " + std::to_string(line) + ":" + std::to_string(col);
        throw SyntaxError("syntax error at " + where + ": " + message, t.offset);
    }

    auto peek(std::size_t ahead = 0) const -> const Token & { return _tokens[std::min(_pos + ahead, _tokens.size() - 1)]; }
    auto next() -> const Token &
    {
        auto & t = _tokens[_pos];
        if (_pos + 1 < _tokens.size())
            ++_pos;
        return t;
    }
    auto is_punct(const char * p, std::size_t ahead = 0) const -> bool
    {
        return peek(ahead).kind == Token::Kind::Punct && peek(ahead).text == p;
    }
    auto expect_punct(const char * p) -> const Token &
    {
        if (! is_punct(p))
            fail(peek(), std::string("expected '") + p + "'");
        return next();
    }
    auto expect_ident(const char * what) -> const Token &
    {
        if (peek().kind != Token::Kind::Ident)
            fail(peek(), std::string("expected ") + what);
        return next();
    }
    auto expect_number() -> Elem
    {
        if (peek().kind != Token::Kind::Number)
            fail(peek(), "expected an element id");
        auto & t = next();
        try {
            auto v = std::stoull(t.text);
            if (v > UINT32_MAX)
                throw std::out_of_range("element");
            return static_cast<Elem>(v);
        } catch (const std::exception &) {
            fail(t, "element id '" + t.text + "' out of range");
        }
    }
    auto skip_separators() -> void
    {
        while (is_punct(";"))
            next();
    }

    auto read_signature() -> void
    {
        auto & open = expect_punct("{");
        std::vector<RelationSymbol> rels;
        std::vector<std::string> consts;
        skip_separators();
        while (! is_punct("}")) {
            auto & name = expect_ident("a symbol name");
            expect_punct(":");
            if (peek().kind == Token::Kind::Ident && peek().text == "const") {
                next();
                consts.push_back(name.text);
            } else {
                auto arity = expect_number();
                if (arity == 0)
                    consts.push_back(name.text);
                else
                    rels.push_back({name.text, arity});
            }
            if (! is_punct("}"))
                expect_punct(";");
            skip_separators();
        }
        next();
        try {
            Signature sig{std::move(rels), std::move(consts)};
            if (_out.signature && *_out.signature != sig)
                fail(open, "conflicting signature declarations");
            _out.signature = std::move(sig);
        } catch (const SyntaxError &) {
            throw;
        } catch (const Error & e) {
            fail(open, e.what());
        }
    }

    auto read_structure() -> RawStructure
    {
        RawStructure s;
        auto & name = expect_ident("a structure name");
        s.name = name.text;
        s.offset = name.offset;
        expect_punct("{");
        skip_separators();
        while (! is_punct("}")) {
            auto & key = expect_ident("'universe' or a symbol name");
            expect_punct(":");
            if (key.text == "universe") {
                if (s.universe)
                    fail(key, "universe given twice");
                std::vector<Elem> u;
                while (peek().kind == Token::Kind::Number)
                    u.push_back(expect_number());
                s.universe = std::move(u);
            } else {
                RawEntry entry;
                entry.symbol = key.text;
                entry.offset = key.offset;
                if (peek().kind == Token::Kind::Number) {
                    entry.is_constant = true;
                    entry.value = expect_number();
                } else {
                    while (is_punct("(")) {
                        next();
                        Tuple t;
                        while (peek().kind == Token::Kind::Number)
                            t.push_back(expect_number());
                        expect_punct(")");
                        if (t.empty())
                            fail(key, "empty tuple in relation '" + key.text + "'");
                        entry.tuples.push_back(std::move(t));
                        if (is_punct(","))
                            next();
                    }
                }
                for (auto & other : s.entries)
                    if (other.symbol == entry.symbol)
                        fail(key, "symbol '" + key.text + "' interpreted twice");
                s.entries.push_back(std::move(entry));
            }
            if (! is_punct("}"))
                expect_punct(";");
            skip_separators();
        }
        next();
        if (! s.universe)
            fail(name, "structure '" + s.name + "' lacks a universe");
        return s;
    }

    auto read_system(const Token & keyword) -> void
    {
        if (_out.system_name)
            fail(keyword, "only one system block is allowed per file");
        _out.system_name = expect_ident("a system name").text;
        expect_punct("{");
        skip_separators();
        while (! is_punct("}")) {
            auto & key = expect_ident("'structures', 'structure', 'arrows' or 'close'");
            if (key.text == "structure") {
                _out.structures.push_back(read_structure());
                skip_separators();
                continue;
            } else if (key.text == "structures") {
                expect_punct(":");
                while (peek().kind == Token::Kind::String || peek().kind == Token::Kind::Ident) {
                    auto & ref = next();
                    if (ref.kind == Token::Kind::Ident) {
                        if (ref.text != "structure")
                            fail(ref, "expected a quoted file name or an inline structure");
                        _out.structures.push_back(read_structure());
                    } else {
                        include(ref);
                    }
                    if (is_punct(","))
                        next();
                }
            } else if (key.text == "arrows") {
                expect_punct(":");
                while (peek().kind == Token::Kind::Ident) {
                    RawArrow a;
                    auto & src = next();
                    a.src = src.text;
                    a.offset = src.offset;
                    expect_punct("->");
                    a.dst = expect_ident("a target world").text;
                    expect_punct("[");
                    while (! is_punct("]")) {
                        auto x = expect_number();
                        expect_punct("->");
                        auto y = expect_number();
                        a.pairs.emplace_back(x, y);
                        if (! is_punct("]"))
                            expect_punct(",");
                    }
                    next();
                    _out.arrows.push_back(std::move(a));
                    if (is_punct(","))
                        next();
                }
            } else if (key.text == "close") {
                expect_punct(":");
                auto & v = expect_ident("true or false");
                if (v.text != "true" && v.text != "false")
                    fail(v, "expected true or false");
                _out.close = v.text == "true";
            } else {
                fail(key, "unknown system entry '" + key.text + "'");
            }
            if (! is_punct("}"))
                expect_punct(";");
            skip_separators();
        }
        next();
    }

    auto include(const Token & ref) -> void
    {
        auto path = _base / ref.text;
        std::ifstream in(path);
        if (! in)
            fail(ref, "cannot open structure file '" + path.string() + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        auto text = buf.str();
        RawFile sub;
        Reader reader{text, path.parent_path(), sub};
        try {
            reader.read_file();
        } catch (const SyntaxError & e) {
            throw SyntaxError(path.string() + ": " + e.what(), e.offset());
        }
        if (sub.system_name)
            fail(ref, "included file '" + path.string() + "' must not contain a system block");
        if (sub.signature) {
            if (_out.signature && *_out.signature != *sub.signature)
                fail(ref, "included file declares a conflicting signature");
            _out.signature = sub.signature;
        }
        for (auto & s : sub.structures)
            _out.structures.push_back(std::move(s));
    }

    std::string_view _text;
    std::vector<Token> _tokens;
    std::size_t _pos = 0;
    std::filesystem::path _base;
    RawFile & _out;
};

auto infer_signature(const RawFile & raw) -> Signature
{
    std::map<std::string, std::optional<std::size_t>> arity;
    std::set<std::string> constants;
    for (auto & s : raw.structures) {
        for (auto & e : s.entries) {
            if (e.is_constant) {
                if (arity.contains(e.symbol))
                    throw Error("symbol '" + e.symbol + "' used both as relation and constant");
                constants.insert(e.symbol);
                continue;
            }
            if (constants.contains(e.symbol))
                throw Error("symbol '" + e.symbol + "' used both as relation and constant");
            auto & slot = arity[e.symbol];
            for (auto & t : e.tuples) {
                if (slot && *slot != t.size())
                    throw Error("relation '" + e.symbol + "' used with arities " + std::to_string(*slot) + " and "
                        + std::to_string(t.size()));
                slot = t.size();
            }
        }
    }
    std::vector<RelationSymbol> rels;
    for (auto & [name, a] : arity) {
        if (! a)
            throw Error("cannot infer the arity of '" + name + "' (no tuples); declare a signature block");
        rels.push_back({name, *a});
    }
    return Signature{std::move(rels), {constants.begin(), constants.end()}};
}

auto build_structure(const Signature & sig, const RawStructure & raw) -> Structure
{
    std::vector<std::vector<Tuple>> relations(sig.relations().size());
    std::vector<std::optional<Elem>> constants(sig.constants().size());
    for (auto & e : raw.entries) {
        if (auto r = sig.relation_index(e.symbol)) {
            if (e.is_constant)
                throw Error("structure '" + raw.name + "': relation '" + e.symbol + "' given a single element");
            relations[*r] = e.tuples;
        } else if (auto c = sig.constant_index(e.symbol)) {
            if (! e.is_constant)
                throw Error("structure '" + raw.name + "': constant '" + e.symbol + "' given tuples");
            constants[*c] = e.value;
        } else {
            throw Error("structure '" + raw.name + "': symbol '" + e.symbol + "' is not in the signature");
        }
    }
    std::vector<Elem> values;
    for (std::size_t c = 0; c < constants.size(); ++c) {
        if (! constants[c])
            throw Error("structure '" + raw.name + "' does not interpret constant '" + sig.constants()[c] + "'");
        values.push_back(*constants[c]);
    }
    try {
        return Structure{sig, *raw.universe, std::move(relations), std::move(values)};
    } catch (const Error & e) {
        throw Error("structure '" + raw.name + "': " + e.what());
    }
}

auto read_raw(std::string_view text, const std::filesystem::path & base_dir) -> RawFile
{
    RawFile raw;
    Reader{text, base_dir, raw}.read_file();
    return raw;
}

auto worlds_of(const RawFile & raw) -> std::vector<World>
{
    if (raw.structures.empty())
        throw Error("no structures given");
    auto sig = raw.signature ? *raw.signature : infer_signature(raw);
    std::vector<World> worlds;
    for (auto & s : raw.structures)
        worlds.push_back({s.name, build_structure(sig, s)});
    return worlds;
}

} // namespace

auto parse_structures(std::string_view text, const std::filesystem::path & base_dir) -> std::vector<World>
{
    return worlds_of(read_raw(text, base_dir));
}

auto parse_system(std::string_view text, const std::filesystem::path & base_dir) -> NamedSystem
{
    auto raw = read_raw(text, base_dir);
    auto worlds = worlds_of(raw);

    std::vector<Arrow> arrows;
    for (auto & a : raw.arrows) {
        auto find = [&](const std::string & name) -> std::size_t {
            for (std::size_t i = 0; i < worlds.size(); ++i)
                if (worlds[i].name == name)
                    return i;
            throw Error("arrow mentions unknown (dangling) world '" + name + "'");
        };
        arrows.push_back({find(a.src), find(a.dst), ElementMap{a.pairs}});
    }
    auto name = raw.system_name.value_or(raw.structures.front().name);
    auto mode = raw.close ? ClosureMode::Close : ClosureMode::Validate;
    return {name, PotentialistSystem::validate_or_close(std::move(worlds), std::move(arrows), mode)};
}

auto load_system(const std::filesystem::path & path) -> NamedSystem
{
    std::ifstream in(path);
    if (! in)
        throw Error("cannot open '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_system(buf.str(), path.parent_path());
    } catch (const SyntaxError & e) {
        throw SyntaxError(path.string() + ": " + e.what(), e.offset());
    }
}

auto write_structure(const std::string & name, const Structure & s) -> std::string
{
    std::ostringstream out;
    out << "structure " << name << " {\n    universe:";
    for (auto e : s.universe())
        out << ' ' << e;
    out << ";\n";
    auto & sig = s.signature();
    for (std::size_t r = 0; r < sig.relations().size(); ++r) {
        out << "    " << sig.relations()[r].name << ":";
        for (auto & t : s.relation(r)) {
            out << " (";
            for (std::size_t i = 0; i < t.size(); ++i)
                out << (i ? " " : "") << t[i];
            out << ")";
        }
        out << ";\n";
    }
    for (std::size_t c = 0; c < sig.constants().size(); ++c)
        out << "    " << sig.constants()[c] << ": " << s.constants()[c] << ";\n";
    out << "}\n";
    return out.str();
}

namespace {

auto write_signature(const Signature & sig) -> std::string
{
    std::string out = "signature {";
    for (auto & r : sig.relations())
        out += " " + r.name + ": " + std::to_string(r.arity) + ";";
    for (auto & c : sig.constants())
        out += " " + c + ": const;";
    return out + " }\n";
}

auto indent(const std::string & block) -> std::string
{
    std::string out;
    std::istringstream in(block);
    std::string line;
    while (std::getline(in, line))
        out += "    " + line + "\n";
    return out;
}

} // namespace

auto write_system(const std::string & name, const PotentialistSystem & sys) -> std::string
{
    std::string out = write_signature(sys.signature()) + "\nsystem " + name + " {\n";
    for (auto & w : sys.worlds())
        out += indent(write_structure(w.name, w.structure));
    out += "    arrows:\n";
    for (std::size_t i = 0; i < sys.arrows().size(); ++i) {
        auto & a = sys.arrow(i);
        out += "        " + sys.world(a.src).name + " -> " + sys.world(a.dst).name + " [" + a.map.to_string() + "]";
        out += i + 1 < sys.arrows().size() ? ",\n" : ";\n";
    }
    out += "    close: false;\n}\n";
    return out;
}

auto write_adjacency(const PotentialistSystem & sys) -> std::string
{
    std::string out;
    for (auto & a : sys.arrows())
        out += sys.world(a.src).name + "\t" + sys.world(a.dst).name + "\t" + a.map.to_string() + "\n";
    return out;
}

} // namespace potsys
