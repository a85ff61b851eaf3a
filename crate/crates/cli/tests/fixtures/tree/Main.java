public class Main {
    public static void main(String[] args) {
        run(args);
    }

    static void run(String[] args) {
        // { not a brace
        System.out.println("args: " + args.length);
    }
}
