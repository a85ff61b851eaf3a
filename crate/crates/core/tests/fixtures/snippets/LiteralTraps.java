class Messages {
    String render(String user) {
        String s = "if (x) { return; } // not code";
        char c = '{';
        /* for (;;) { while (true) } */
        String t = """
            case 1: while (y) { }
            """;
        return s + c + t + user; // trailing if
    }
}
