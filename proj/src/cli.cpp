#include <potsys/charform.hpp>
#include <potsys/checker.hpp>
#include <potsys/cli.hpp>
#include <potsys/error.hpp>
#include <potsys/games.hpp>
#include <potsys/models.hpp>
#include <potsys/text_format.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace potsys::cli {

namespace {

class UsageError : public std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct Caps
{
    std::size_t max_size = default_model_size_cap;
    unsigned max_alpha = default_alpha_cap;
    std::size_t unravel_depth = 3;
};

auto env_cap(const char * name, std::size_t fallback) -> std::size_t
{
    auto value = std::getenv(name);
    if (! value)
        return fallback;
    std::string text{value};
    if (text.empty() || ! std::ranges::all_of(text, [](char c) { return c >= '0' && c <= '9'; }))
        throw UsageError(std::string(name) + " must be a positive integer, got '" + text + "'");
    auto n = std::stoull(text);
    if (n == 0)
        throw UsageError(std::string(name) + " must be positive");
    return n;
}

auto read_file(const std::string & path) -> std::string
{
    std::ifstream in(path);
    if (! in)
        throw Error("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

auto write_file(const std::filesystem::path & path, const std::string & text) -> void
{
    std::ofstream out(path);
    if (! out || ! (out << text))
        throw Error("cannot write '" + path.string() + "'");
}

auto split(const std::string & text, char sep) -> std::vector<std::string>
{
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(text);
    while (std::getline(in, part, sep))
        parts.push_back(part);
    return parts;
}

auto parse_elem(const std::string & text) -> Elem
{
    if (text.empty() || ! std::ranges::all_of(text, [](char c) { return c >= '0' && c <= '9'; }))
        throw UsageError("expected an element id, got '" + text + "'");
    return static_cast<Elem>(std::stoul(text));
}

auto parse_tuple(const std::string & text) -> Tuple
{
    Tuple t;
    if (text.empty())
        return t;
    for (auto & part : split(text, ','))
        t.push_back(parse_elem(part));
    return t;
}

auto world_of(const NamedSystem & s, const std::string & name) -> std::size_t
{
    if (auto w = s.system.world_index(name))
        return *w;
    throw Error("system '" + s.name + "' has no world '" + name + "'");
}

struct Pointed
{
    std::size_t left_world = 0;
    Tuple a;
    std::size_t right_world = 0;
    Tuple b;
};

// "W:0,1=V:1,2"; an empty option points at the first worlds with empty tuples.
auto parse_pointed(const std::string & text, const NamedSystem & left, const NamedSystem & right) -> Pointed
{
    if (text.empty())
        return {};
    auto eq = text.find('=');
    if (eq == std::string::npos)
        throw UsageError("--pointed expects W:a=V:b, got '" + text + "'");
    auto side = [&](const std::string & part, const NamedSystem & sys) -> std::pair<std::size_t, Tuple> {
        auto colon = part.find(':');
        if (colon == std::string::npos)
            throw UsageError("--pointed expects W:a=V:b, got '" + text + "'");
        return {world_of(sys, part.substr(0, colon)), parse_tuple(part.substr(colon + 1))};
    };
    auto [lw, a] = side(text.substr(0, eq), left);
    auto [rw, b] = side(text.substr(eq + 1), right);
    if (a.size() != b.size())
        throw UsageError("pointed tuples differ in length");
    return {lw, a, rw, b};
}

auto check_membership(const PotentialistSystem & sys, std::size_t world, const Tuple & t) -> void
{
    for (auto e : t)
        if (! sys.structure(world).contains(e))
            throw Error("element " + std::to_string(e) + " is not in world '" + sys.world(world).name + "'");
}

auto load_theory(const std::string & path, const Signature & sig) -> std::vector<Formula>
{
    if (path.empty())
        return {};
    return parse_formula_list(read_file(path), &sig);
}

auto yes_no(bool b) -> const char * { return b ? "yes" : "no"; }

} // namespace

auto run(std::vector<std::string> args, std::istream & in, std::ostream & out, std::ostream & err) -> int
{
    CLI::App app{"Potentialist systems: model checking, bisimulation games and characteristic formulas", "potsys"};
    app.require_subcommand(1);

    Caps caps;
    std::function<int()> action;
    auto set_action = [&](CLI::App * cmd, std::function<int()> f) {
        cmd->callback([&action, f] { action = f; });
    };

    std::size_t size_flag = 0;
    unsigned alpha_cap_flag = 0;
    std::size_t depth_flag = 0;
    auto add_caps = [&](CLI::App * cmd, bool size, bool alpha, bool depth) {
        if (size)
            cmd->add_option("--max-size-cap", size_flag, "Largest model size allowed (env POTSYS_MAX_SIZE)")
                ->check(CLI::PositiveNumber);
        if (alpha)
            cmd->add_option("--max-alpha", alpha_cap_flag, "Largest alpha allowed (env POTSYS_MAX_ALPHA)")
                ->check(CLI::PositiveNumber);
        if (depth)
            cmd->add_option("--depth", depth_flag, "Unravelling depth (env POTSYS_UNRAVEL_DEPTH)")
                ->check(CLI::PositiveNumber);
    };

    // check
    std::string system_path, world, formula_text, formula_file, assign;
    auto * check = app.add_subcommand("check", "Decide whether a pointed world satisfies a formula");
    check->add_option("--system", system_path, "System file")->required();
    check->add_option("--world", world, "World name")->required();
    auto * fopt = check->add_option("--formula", formula_text, "Formula text");
    auto * ffile = check->add_option("--formula-file", formula_file, "File holding the formula");
    fopt->excludes(ffile);
    check->add_option("--assign", assign, "Variable assignment, e.g. x=0,y=2");
    set_action(check, [&] {
        auto sys = load_system(system_path);
        auto w = world_of(sys, world);
        if (formula_text.empty() && formula_file.empty())
            throw UsageError("check needs --formula or --formula-file");
        auto text = formula_file.empty() ? formula_text : read_file(formula_file);
        auto f = parse_formula(text, &sys.system.signature());
        Assignment asg;
        for (auto & part : split(assign, ',')) {
            auto eq = part.find('=');
            if (eq == std::string::npos || eq == 0)
                throw UsageError("--assign expects var=elem pairs, got '" + part + "'");
            asg[part.substr(0, eq)] = parse_elem(part.substr(eq + 1));
        }
        auto verdict = satisfies(sys.system, w, asg, f);
        out << (verdict ? "true" : "false") << "\n";
        return verdict ? exit_true : exit_false;
    });

    // bisim / rank / game share the board options.
    std::string left_path, right_path, pointed;
    std::size_t position_cap = default_position_cap;
    auto add_board = [&](CLI::App * cmd) {
        cmd->add_option("--left", left_path, "Left system file")->required();
        cmd->add_option("--right", right_path, "Right system file")->required();
        cmd->add_option("--position-cap", position_cap, "Largest number of canonical positions")
            ->check(CLI::PositiveNumber);
    };

    std::optional<unsigned> bisim_alpha;
    auto * bisim = app.add_subcommand("bisim", "Decide (alpha-)bisimilarity of two pointed systems");
    add_board(bisim);
    bisim->add_option("--pointed", pointed, "W:a=V:b, e.g. A:0,1=L:1,2 (default: first worlds, empty tuples)");
    bisim->add_option("--alpha", bisim_alpha, "Decide alpha-bisimilarity instead");
    set_action(bisim, [&] {
        auto left = load_system(left_path);
        auto right = load_system(right_path);
        auto p = parse_pointed(pointed, left, right);
        check_membership(left.system, p.left_world, p.a);
        check_membership(right.system, p.right_world, p.b);
        auto table = RankTable::build(left.system, right.system, position_cap);
        auto r = table.rank(p.left_world, p.a, p.right_world, p.b);
        bool verdict = bisim_alpha ? r.at_least(*bisim_alpha) : r.is_infinite();
        out << "rank: " << r.to_string() << "\n";
        if (bisim_alpha)
            out << "alpha: " << *bisim_alpha << "\n";
        out << "bisimilar: " << yes_no(verdict) << "\n";
        return verdict ? exit_true : exit_false;
    });

    std::string emit;
    auto * rank = app.add_subcommand("rank", "Tabulate the rank of every canonical position");
    add_board(rank);
    rank->add_option("--emit", emit, "Write the table to this file instead of stdout");
    set_action(rank, [&] {
        auto left = load_system(left_path);
        auto right = load_system(right_path);
        auto table = RankTable::build(left.system, right.system, position_cap);
        std::ostringstream tsv;
        tsv << "left\tright\tmap\trank\n";
        for (std::size_t i = 0; i < table.size(); ++i) {
            auto p = table.position(i);
            tsv << left.system.world(p.left_world).name << '\t' << right.system.world(p.right_world).name << '\t'
                << p.match.to_string() << '\t' << table.rank_at(i).to_string() << '\n';
        }
        if (emit.empty()) {
            out << tsv.str();
        } else {
            write_file(emit, tsv.str());
            out << "positions: " << table.size() << "\niterations: " << table.iterations() << "\n";
        }
        return exit_true;
    });

    std::string as = "abelard";
    std::size_t max_plies = 20;
    auto * game = app.add_subcommand("game", "Play the bisimulation game against the rank table");
    add_board(game);
    game->add_option("--pointed", pointed, "Start position W:a=V:b (default: first worlds, empty tuples)");
    game->add_option("--as", as, "Side played by the user")->check(CLI::IsMember({"abelard", "eloise"}));
    game->add_option("--max-plies", max_plies, "Rounds before Eloise is declared the winner");
    set_action(game, [&] {
        auto left = load_system(left_path);
        auto right = load_system(right_path);
        auto p = parse_pointed(pointed, left, right);
        check_membership(left.system, p.left_world, p.a);
        check_membership(right.system, p.right_world, p.b);
        auto table = RankTable::build(left.system, right.system, position_cap);
        auto start = canonical_position(p.left_world, p.a, p.right_world, p.b);
        if (! start)
            throw Error("the start tuples do not induce a partial injection");
        out << "moves: left|right elem N, left|right arrow N; 'help' lists legal moves, 'quit' ends\n";
        auto tr = play_interactive(table, *start, as == "abelard" ? Side::Abelard : Side::Eloise, in, out, max_plies);
        if (! tr.winner)
            return exit_false;
        auto user_won = (*tr.winner == Side::Abelard) == (as == "abelard");
        return user_won ? exit_true : exit_false;
    });

    // theta
    std::string tuple_text;
    unsigned alpha = 0;
    auto * theta_cmd = app.add_subcommand("theta", "Synthesize a characteristic formula");
    theta_cmd->add_option("--system", system_path, "System file")->required();
    theta_cmd->add_option("--world", world, "World name")->required();
    theta_cmd->add_option("--tuple", tuple_text, "Comma-separated elements, e.g. 0,1");
    theta_cmd->add_option("--alpha", alpha, "Rank of the formula")->required();
    theta_cmd->add_option("--emit", emit, "Write the formula to this file");
    add_caps(theta_cmd, false, true, false);
    set_action(theta_cmd, [&] {
        auto sys = load_system(system_path);
        auto w = world_of(sys, world);
        auto t = parse_tuple(tuple_text);
        check_membership(sys.system, w, t);
        auto f = theta(sys.system, w, t, alpha, caps.max_alpha);
        if (emit.empty()) {
            out << to_string(f) << "\n";
        } else {
            write_file(emit, to_string(f) + "\n");
            out << "mqrank: " << f.mqrank() << "\nsize: " << f.tree_size() << "\n";
        }
        return exit_true;
    });

    // enum / modmode
    std::string sig_text, theory_path, system_kind = "mode";
    std::size_t max_size = 0;
    auto add_models = [&](CLI::App * cmd) {
        cmd->add_option("--sig", sig_text, "Signature, e.g. \"R:2, c:0\"")->required();
        cmd->add_option("--theory", theory_path, "File of sentences (default: empty theory)");
        cmd->add_option("--max-size", max_size, "Largest carrier size")->required()->check(CLI::PositiveNumber);
        add_caps(cmd, true, false, false);
    };
    auto * enum_cmd = app.add_subcommand("enum", "Enumerate the finite models of a theory");
    add_models(enum_cmd);
    enum_cmd->add_option("--system", system_kind, "Arrows of the emitted system")
        ->check(CLI::IsMember({"mod", "mode"}));
    enum_cmd->add_option("--emit", emit, "Write the system to this file");
    set_action(enum_cmd, [&] {
        auto sig = parse_signature(sig_text);
        auto models = enumerate_models(sig, load_theory(theory_path, sig), max_size, caps.max_size);
        out << models.size() << " models\n";
        if (models.empty())
            return exit_true;
        auto sys = system_kind == "mod" ? build_mod_system(models) : build_mode_system(models);
        auto text = write_system(system_kind == "mod" ? "Mod" : "ModE", sys);
        if (emit.empty()) {
            out << text;
        } else {
            write_file(emit, text);
            out << "arrows: " << sys.arrows().size() << "\n";
        }
        return exit_true;
    });

    auto * modmode = app.add_subcommand("modmode", "Compare the inclusion and embedding systems of a theory");
    add_models(modmode);
    set_action(modmode, [&] {
        auto sig = parse_signature(sig_text);
        auto models = enumerate_models(sig, load_theory(theory_path, sig), max_size, caps.max_size);
        if (models.empty()) {
            out << "0 models; bitotal: yes\n";
            return exit_true;
        }
        auto mod = build_mod_system(models);
        auto mode = build_mode_system(models);
        auto table = RankTable::build(mod, mode, position_cap);
        std::size_t matched = 0;
        for (std::size_t w = 0; w < models.size(); ++w)
            matched += is_bisimilar(table, w, {}, w, {}) ? 1 : 0;
        auto rel = extract_bisimulation(table);
        bool bitotal = matched == models.size() && rel && relation_totality(*rel, mod, mode).bitotal();
        out << models.size() << " models; bitotal: " << yes_no(bitotal) << "\n";
        out << "mod arrows: " << mod.arrows().size() << "\nmode arrows: " << mode.arrows().size() << "\n";
        out << "worlds bisimilar to their copy: " << matched << "/" << models.size() << "\n";
        return bitotal ? exit_true : exit_false;
    });

    // unravel
    auto * unravel = app.add_subcommand("unravel", "List the unravelling of a world and check its local zig-zag");
    unravel->add_option("--system", system_path, "System file")->required();
    unravel->add_option("--world", world, "Root world")->required();
    add_caps(unravel, false, false, true);
    set_action(unravel, [&] {
        auto sys = load_system(system_path);
        auto root = world_of(sys, world);
        auto tagged = disjointify(sys.system);
        std::vector<UnravelNode> level{unravel_root(sys.system, root)};
        std::vector<UnravelNode> tagged_level{unravel_root(tagged.system, root)};
        std::size_t nodes = 0;
        bool zigzag = true, squares = true;
        for (std::size_t d = 0; d <= caps.unravel_depth; ++d) {
            std::vector<UnravelNode> next, tagged_next;
            for (std::size_t i = 0; i < level.size(); ++i) {
                ++nodes;
                out << level[i].to_string() << "\n";
                if (d == caps.unravel_depth)
                    continue;
                auto children = unravel_children(level[i], caps.unravel_depth);
                zigzag = zigzag && local_zigzag_holds(level[i], children);
                for (auto & c : unravel_children(tagged_level[i], caps.unravel_depth)) {
                    squares = squares && renaming_square_commutes(tagged_level[i], c.arrow);
                    tagged_next.push_back(c.node);
                }
                for (auto & c : children)
                    next.push_back(c.node);
            }
            level = std::move(next);
            tagged_level = std::move(tagged_next);
        }
        out << "nodes: " << nodes << "\nzigzag: " << yes_no(zigzag) << "\nsquares: " << yes_no(squares) << "\n";
        return zigzag && squares ? exit_true : exit_false;
    });

    // skeleton
    auto * skel = app.add_subcommand("skeleton", "Collapse isomorphic worlds");
    skel->add_option("--system", system_path, "System file")->required();
    skel->add_option("--emit", emit, "Write the skeleton system to this file");
    set_action(skel, [&] {
        auto sys = load_system(system_path);
        auto sk = skeleton(sys.system);
        out << "worlds: " << sys.system.world_count() << "\nclasses: " << sk.system.world_count() << "\n";
        for (std::size_t w = 0; w < sk.quotient.size(); ++w)
            out << sys.system.world(w).name << " -> " << sk.system.world(sk.quotient[w]).name << "\n";
        if (! emit.empty())
            write_file(emit, write_system(sys.name + "_skeleton", sk.system));
        return exit_true;
    });

    // examples
    auto * examples = app.add_subcommand("examples", "Generate the ordinal-graph and button-system families");
    examples->require_subcommand(1);
    unsigned buttons = 0, base = 2;
    auto emit_dir = [&]() -> std::optional<std::filesystem::path> {
        if (emit.empty())
            return std::nullopt;
        std::filesystem::create_directories(emit);
        return std::filesystem::path{emit};
    };
    auto print_matrix = [&](const std::vector<std::vector<bool>> & m, const char * what) {
        out << what << "\n";
        for (std::size_t i = 0; i < m.size(); ++i) {
            out << i << ':';
            for (bool b : m[i])
                out << ' ' << (b ? '1' : '0');
            out << '\n';
        }
    };
    auto * ordinal = examples->add_subcommand("ordinal", "Ordinal graphs (alpha+1, <) and the sentences nu_beta");
    ordinal->add_option("--alpha", alpha, "Largest ordinal")->required();
    ordinal->add_option("--emit", emit, "Directory for the generated files");
    add_caps(ordinal, false, true, false);
    set_action(ordinal, [&] {
        auto dir = emit_dir();
        std::vector<std::vector<bool>> holds;
        for (unsigned a = 0; a <= alpha; ++a) {
            auto graph = ordinal_graph(a, caps.max_alpha);
            auto sys = PotentialistSystem::discrete({{"O" + std::to_string(a), graph}});
            holds.emplace_back();
            for (unsigned b = 0; b <= alpha; ++b)
                holds.back().push_back(satisfies_fo(graph, {}, nu(b, caps.max_alpha)));
            if (dir) {
                write_file(*dir / ("ordinal_" + std::to_string(a) + ".sys"),
                    write_system("Ordinal" + std::to_string(a), sys));
                write_file(*dir / ("nu_" + std::to_string(a) + ".fml"), to_string(nu(a, caps.max_alpha)) + "\n");
            }
        }
        print_matrix(holds, "row alpha, column beta: (alpha+1, <) satisfies nu_beta");
        bool diagonal = true;
        for (unsigned a = 0; a <= alpha; ++a)
            for (unsigned b = 0; b <= alpha; ++b)
                diagonal = diagonal && holds[a][b] == (a == b);
        return diagonal ? exit_true : exit_false;
    });

    auto * button = examples->add_subcommand("buttons", "Button systems and their root sentences");
    button->add_option("--alpha", alpha, "Largest tree height")->required();
    button->add_option("--buttons", buttons, "Number of buttons (default: alpha)");
    button->add_option("--base", base, "Elements besides the buttons");
    button->add_option("--emit", emit, "Directory for the generated files");
    add_caps(button, false, true, false);
    set_action(button, [&] {
        auto dir = emit_dir();
        auto k = buttons == 0 ? alpha : buttons;
        std::vector<Formula> thetas;
        for (unsigned b = 0; b <= alpha; ++b)
            thetas.push_back(button_theta(b, caps.max_alpha));
        std::vector<std::vector<bool>> holds;
        for (unsigned a = 0; a <= alpha; ++a) {
            auto bs = button_system(a, k, base, caps.max_alpha);
            ModelChecker checker{bs.system};
            holds.emplace_back();
            for (auto & t : thetas)
                holds.back().push_back(checker.satisfies(bs.root, {}, t));
            if (dir) {
                write_file(*dir / ("buttons_" + std::to_string(a) + ".sys"),
                    write_system("Buttons" + std::to_string(a), bs.system));
                write_file(*dir / ("theta_" + std::to_string(a) + ".fml"), to_string(thetas[a]) + "\n");
            }
        }
        print_matrix(holds, "row alpha, column beta: root of the height-alpha system satisfies theta_beta");
        bool diagonal = true;
        for (unsigned a = 0; a <= alpha; ++a)
            for (unsigned b = 0; b <= alpha; ++b)
                diagonal = diagonal && holds[a][b] == (a == b);
        return diagonal ? exit_true : exit_false;
    });

    try {
        std::ranges::reverse(args);
        app.parse(args);
        caps.max_size = size_flag ? size_flag : env_cap("POTSYS_MAX_SIZE", caps.max_size);
        caps.max_alpha = alpha_cap_flag ? alpha_cap_flag
                                        : static_cast<unsigned>(env_cap("POTSYS_MAX_ALPHA", caps.max_alpha));
        caps.unravel_depth = depth_flag ? depth_flag : env_cap("POTSYS_UNRAVEL_DEPTH", caps.unravel_depth);
        if (! action)
            throw UsageError("no command given");
        return action();
    } catch (const CLI::Success & e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError & e) {
        app.exit(e, out, err);
        return exit_usage;
    } catch (const UsageError & e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception & e) {
        err << "error: " << e.what() << "\n";
        return exit_input;
    }
}

} // namespace potsys::cli
